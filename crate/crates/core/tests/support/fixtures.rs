//! Hand-written, pre-segmented fixtures.

#![allow(dead_code)]

/// Seven abstract sentences whose nearest neighbours among the PLS sentences are
/// abstract sentences 1, 6, 5 and 7 (1-based), in that PLS order.
pub const MATCH_ABSTRACT: [&str; 7] = [
    "This review included two trials comparing rapid and slow negative pressure for vacuum extraction.",
    "We searched the trials register in March.",
    "Two review authors independently assessed eligibility and extracted data.",
    "Risk of bias was judged as low for most domains.",
    "There were no significant differences in failure rates between rapid and slow application.",
    "Rapid application shortened the duration of the procedure.",
    "The rapid method can be recommended because it saves time without harming mothers or babies.",
];

pub const MATCH_PLS: [&str; 4] = [
    "This review found two trials comparing rapid and slow negative pressure.",
    "Rapid application made the procedure shorter.",
    "There were no differences in failure rates.",
    "The rapid method can be recommended because it saves time.",
];
