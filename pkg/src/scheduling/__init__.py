# Pulse-Wave Simulator - Scheduling App
# Global pulse timetable: offsets, ON windows, retarget instants
