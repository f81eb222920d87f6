# Power Outage Monitor - Django Configuration Package
