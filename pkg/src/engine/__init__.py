# Pulse-Wave Simulator - Engine App
# Deterministic discrete-event core: clock, links, queues, forwarding
