//! Explanation export (under construction).
