//! Property tests for the GF(2) layer: complement duality, span sizes, and
//! agreement between algebraic and enumerated membership.

use proptest::prelude::*;

use gspsim_core::gf2::{rank, BitVector, Gf2Basis};

/// A random width together with a random independent set in that width.
fn arb_basis() -> impl Strategy<Value = Gf2Basis> {
    (1u32..=8).prop_flat_map(|width| {
        prop::collection::vec(0u32..1 << width, 0..=width as usize).prop_map(move |raw| {
            let mut basis = Gf2Basis::empty(width);
            for bits in raw {
                basis.extend_if_independent(BitVector::new(width, bits));
            }
            basis
        })
    })
}

proptest! {
    #[test]
    fn perp_is_an_involution_on_spans(basis in arb_basis()) {
        let double = basis.perp().perp();
        prop_assert_eq!(
            double.enumerate_span().unwrap(),
            basis.enumerate_span().unwrap()
        );
    }

    #[test]
    fn span_size_is_two_to_the_rank(basis in arb_basis()) {
        let span = basis.enumerate_span().unwrap();
        prop_assert_eq!(span.len(), 1usize << basis.rank());
    }

    #[test]
    fn perp_rank_is_complementary(basis in arb_basis()) {
        let width = basis.ambient_width() as usize;
        prop_assert_eq!(basis.perp().rank(), width - basis.rank());
    }

    #[test]
    fn in_span_agrees_with_enumeration(basis in arb_basis()) {
        let width = basis.ambient_width();
        let span = basis.enumerate_span().unwrap();
        for bits in 0..1u32 << width {
            let v = BitVector::new(width, bits);
            prop_assert_eq!(basis.in_span(v), span.contains(&v));
        }
    }

    #[test]
    fn extension_never_creates_dependence(
        width in 1u32..=8,
        raw in prop::collection::vec(any::<u32>(), 0..24)
    ) {
        let mut basis = Gf2Basis::empty(width);
        for bits in raw {
            basis.extend_if_independent(BitVector::new(width, bits & ((1 << width) - 1)));
            prop_assert_eq!(rank(basis.vectors()), basis.rank());
        }
    }

    #[test]
    fn perp_vectors_annihilate_the_basis(basis in arb_basis()) {
        let perp = basis.perp();
        for g in perp.vectors() {
            for h in basis.vectors() {
                prop_assert!(!g.dot(*h));
            }
        }
    }

    #[test]
    fn xor_is_an_involution(width in 1u32..=24, a in any::<u32>(), b in any::<u32>()) {
        let mask = if width == 24 { 0xff_ffff } else { (1 << width) - 1 };
        let x = BitVector::new(width, a & mask);
        let y = BitVector::new(width, b & mask);
        prop_assert_eq!(x.xor(y).xor(y), x);
        prop_assert_eq!(x.xor(x), BitVector::zero(width));
    }

    #[test]
    fn display_parse_roundtrip(width in 1u32..=24, a in any::<u32>()) {
        let mask = if width == 24 { 0xff_ffff } else { (1 << width) - 1 };
        let v = BitVector::new(width, a & mask);
        let s = v.to_string();
        prop_assert_eq!(s.len(), width as usize);
        prop_assert_eq!(s.parse::<BitVector>().unwrap(), v);
    }
}
