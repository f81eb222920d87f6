# Pulse-Wave Simulator - Topology App
# Central Network synthesis, AS attachment, addressing and routing
