# Gene regulatory network dynamics engine