# Pulse-Wave Simulator - Traffic App
# Attacker and benign applications, packet crafting
