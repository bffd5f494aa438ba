//! Training orchestration (under construction).
