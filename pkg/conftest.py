# Keeps the repository root importable so tests can import spanemu and version.
