"""Track files, run configuration and output stores."""
