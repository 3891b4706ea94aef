"""Session hosting: wire protocol, tick scheduling, voice synthesis,
persistence, analytics export, and the command-line interface."""
