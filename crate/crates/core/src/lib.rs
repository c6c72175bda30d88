//! Exact computation in A-fibered Burnside rings of finite groups.
//!
//! The library works with finite groups given by Cayley tables, a finite
//! abelian fiber group `A`, and the fibered Burnside ring `B^A(G)` over a
//! splitting field realized by exact cyclotomic arithmetic. On top of the
//! ring itself it provides the mark and species homomorphisms, primitive
//! idempotents, elementary fibered biset operations, deflation constants,
//! `B^A`-pair detection and the poset/lattice structure these pairs induce.
//!
//! All arithmetic is exact: rationals are arbitrary precision and roots of
//! unity are tracked as fractions mod 1 until they are combined into
//! cyclotomic numbers in canonical form.
//!
//! ```
//! use fbr_core::fbring::BurnsideRing;
//! use fbr_core::fiber::FiberGroup;
//! use fbr_core::groups::build_group;
//! use fbr_core::pairs::{all_pairs, is_bpair, m_constant};
//!
//! let group = build_group("S3")?;
//! let ring = BurnsideRing::new(group.clone(), FiberGroup::cyclic(2), 48)?;
//!
//! // primitive idempotents resolve the identity
//! let mut total = ring.zero();
//! for label in ring.xorbit_reps() {
//!     total = total.add(&ring.idempotent(label))?;
//! }
//! assert_eq!(total, ring.one());
//!
//! // both characters of S3* give pairs whose deflation numbers vanish
//! for pair in all_pairs(&ring) {
//!     assert!(is_bpair(&pair, true)?);
//!     assert_eq!(m_constant(&pair, &group.all())?, fbr_core::cyclo::rat_int(0));
//! }
//! # Ok::<(), fbr_core::Error>(())
//! ```

pub mod bisets;
pub mod cyclo;
pub mod error;
pub mod fbring;
pub mod fiber;
pub mod groups;
pub mod lattice;
pub mod pairs;

pub use error::Error;

/// Default cap on group order for subgroup-lattice enumeration.
pub const DEFAULT_ORDER_CAP: usize = 48;
