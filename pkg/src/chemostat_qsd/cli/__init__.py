"""Command-line surface: run configuration, outputs and manifests."""
