# Domain model: networks, parameter graphs, dynamics, patterns, phenotypes, simulation