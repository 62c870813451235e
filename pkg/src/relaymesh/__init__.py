"""Rate bounds and achievable rates for the Gaussian multiple-relay channel."""
