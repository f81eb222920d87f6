# Pulse-Wave Simulator - Capture App
# Per-direction pcap files on the CN surface and the run log
