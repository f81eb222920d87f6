# Pulse-Wave Simulator - Core App
# Shared errors, time units, seeded generators and the CLI commands
