# Utility modules: DOT emission and linear feasibility