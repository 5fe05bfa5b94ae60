//! Property tests for the structural invariants: order laws on trees,
//! the span cardinality law, and encoding round trips.

use proptest::prelude::*;

use duet_core::tree::{LevelSubset, NodeRef, Tree, VectorTree};
use duet_core::word::{enumerate_variable_words, Alphabet, ConstantWord, VariableWord};

fn tree_strategy() -> impl Strategy<Value = Tree> {
    prop::collection::vec(1usize..=3, 1..=3).prop_map(|b| Tree::new(b).unwrap())
}

proptest! {
    #[test]
    fn tree_order_is_a_partial_order(tree in tree_strategy(), seed in 0u64..1000) {
        let mut nodes = Vec::new();
        for n in 0..tree.height() {
            nodes.extend(tree.level_nodes(n).unwrap());
        }
        // sample a few triples driven by the seed
        let pick = |s: u64| nodes[(s as usize) % nodes.len()];
        let (a, b, c) = (pick(seed), pick(seed / 7 + 1), pick(seed / 49 + 2));
        prop_assert!(tree.leq(a, a).unwrap());
        if tree.leq(a, b).unwrap() && tree.leq(b, a).unwrap() {
            prop_assert_eq!(a, b);
        }
        if tree.leq(a, b).unwrap() && tree.leq(b, c).unwrap() {
            prop_assert!(tree.leq(a, c).unwrap());
        }
    }

    #[test]
    fn full_levels_dominate(tree in tree_strategy()) {
        for n in 0..tree.height() {
            for m in 0..=n {
                let upper = LevelSubset::full(&tree, n).unwrap();
                let lower = LevelSubset::full(&tree, m).unwrap();
                prop_assert!(tree.dominates(&upper, &lower).unwrap());
            }
        }
    }

    #[test]
    fn parents_are_unique_predecessors(tree in tree_strategy(), seed in 0u64..500) {
        let vt = VectorTree::new(vec![tree.clone()]).unwrap();
        prop_assume!(tree.height() > 1);
        let node = {
            let sizes: Vec<usize> = (1..tree.height())
                .map(|n| tree.level_size(n).unwrap())
                .collect();
            let level = 1 + (seed as usize) % (tree.height() - 1);
            NodeRef::new(level, (seed as usize / 13) % sizes[level - 1])
        };
        let parent = tree.parent(node).unwrap();
        prop_assert!(tree.leq(parent, node).unwrap());
        // no other node at the parent's level sits below it
        for cand in tree.level_nodes(parent.level).unwrap() {
            if cand != parent {
                prop_assert!(!tree.leq(cand, node).unwrap());
            }
        }
        let _ = vt;
    }

    #[test]
    fn span_law_and_roundtrip(tree in tree_strategy(), k in 1usize..=3, seed in 0u64..10_000) {
        let vt = VectorTree::new(vec![tree]).unwrap();
        let alph = Alphabet::new(k).unwrap();
        prop_assume!(vt.height() >= 2);
        let words = enumerate_variable_words(&vt, &alph, 0, 2.min(vt.height()), 0, 8).unwrap();
        prop_assume!(!words.is_empty());
        let w = &words[(seed as usize) % words.len()];
        // |span| = k^vars, all distinct
        let span = w.span(&vt, &alph).unwrap();
        prop_assert_eq!(span.len(), k.pow(w.var_count() as u32));
        let set: std::collections::BTreeSet<_> = span.iter().collect();
        prop_assert_eq!(set.len(), span.len());
        // encode/parse round trip for the variable word and an instance
        let back = VariableWord::parse(&vt, &alph, &w.encode()).unwrap();
        prop_assert_eq!(&back, w);
        let inst = &span[(seed as usize / 3) % span.len()];
        let inst_back = ConstantWord::parse(&vt, &alph, &inst.encode()).unwrap();
        prop_assert_eq!(&inst_back, inst);
        // substitution fixes non-variable cells
        for (sym, letter) in w.symbols().iter().zip(inst.letters()) {
            if let duet_core::word::Symbol::Letter(a) = sym {
                prop_assert_eq!(a, letter);
            }
        }
    }

    #[test]
    fn certificate_roundtrip(
        key in "[a-z_]{1,8}",
        value in "[a-z0-9=. _-]{0,16}",
        note in "[a-z0-9 :,_-]{0,24}",
        cand in 0u64..1_000_000,
    ) {
        use duet_core::cert::{Certificate, Outcome};
        let mut cert = Certificate::new(
            "hj",
            vec![(key, value)],
            Outcome::Unresolved("nmax=3".to_string()),
        );
        if !note.is_empty() {
            cert.notes.push(note);
        }
        cert.push_stat("candidates", cand);
        let text = cert.serialize();
        let back = Certificate::parse(&text).unwrap();
        prop_assert_eq!(&back, &cert);
        prop_assert_eq!(back.serialize(), text);
    }
}
