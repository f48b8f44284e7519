"""Index-based scheduling for parallel state machine replication."""
