"""Shadow-Hamiltonian Monte Carlo with partial momentum refreshment and importance reweighting."""
