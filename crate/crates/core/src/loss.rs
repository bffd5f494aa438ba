//! Training objectives (under construction).
