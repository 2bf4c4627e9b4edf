"""Manager classes running simulations and writing reports."""
