//! Two-branch encoder (under construction).
