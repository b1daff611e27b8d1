//! Privacy-preserving voting protocols and their reliability simulator.
//!
//! * [`bsv`]: RSA blind-signature ballots posted to an append-only ledger.
//! * [`hev`]: homomorphic (exponential ElGamal) voting with threshold decryption.
//! * [`hevs`]: HEV with `k` sampled public keys and a mode-based decision.
//! * [`adversary`]: malicious and offline voter behaviors.
//! * [`simnet`]: deterministic message-passing driver and transcripts.
//! * [`experiments`]: Monte Carlo accuracy sweeps and analytic tables.

pub mod adversary;
pub mod arith;
pub mod bsv;
pub mod experiments;
pub mod group;
pub mod hev;
pub mod hevs;
pub mod simnet;

pub use adversary::{AdversaryConfig, Behavior, VoterRole};
pub use bsv::{Ballot, BlindingState, Ledger, PhaseWindows, Registry, Rejection, SignerKeys};
pub use experiments::{SweepGrid, SweepRow, TrialConfig, TrialMode};
pub use group::{DlogTable, GroupElement, GroupError, GroupParams, Scalar};
pub use hev::{Ciphertext, DecryptionRequest, DecryptionShare, HevError, KeyShare, Vote, VoterId};
pub use hevs::{SampleResult, SampleSizePolicy, SamplingPlan};
pub use simnet::{ElectionConfig, ElectionFailure, ElectionOutcome, Protocol, Schedule, Transcript};
