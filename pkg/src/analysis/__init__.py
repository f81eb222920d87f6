# Pulse-Wave Simulator - Analysis App
# Reads captures back: time series, vector composition, analytic link load
