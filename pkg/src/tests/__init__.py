# Make tests a package for pytest discovery
