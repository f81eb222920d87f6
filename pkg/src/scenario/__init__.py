# Pulse-Wave Simulator - Scenario App
# YAML scenario parsing, default filling and validation
