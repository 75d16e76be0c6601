"""HTTP surface of the decoybounds service."""
