//! Cross-checks the bitset checker against the whole-vector fixpoint
//! reference on seeded random graphs and formulas.

use ctl::{check, GraphView};
use oracles::{ctl_naive, random_formula, random_graph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn to_csr(adj: &[Vec<u32>]) -> (Vec<u32>, Vec<u32>) {
    let mut offsets = vec![0u32];
    let mut targets = Vec::new();
    for row in adj {
        targets.extend_from_slice(row);
        offsets.push(targets.len() as u32);
    }
    (offsets, targets)
}

#[test]
fn agrees_with_naive_fixpoints_on_random_instances() {
    let names = ["p", "q", "r"];
    let mut rng = ChaCha8Rng::seed_from_u64(0x7c71_90aa);
    for round in 0..200 {
        let (adj, label_names) = random_graph(&mut rng, 12, 3, &names);
        let labels: Vec<u32> = label_names
            .iter()
            .map(|l| names.iter().position(|&n| n == l).unwrap() as u32)
            .collect();
        let (offsets, targets) = to_csr(&adj);
        let view = GraphView::new(&offsets, &targets, &labels).unwrap();
        let resolve = |name: &str| names.iter().position(|&n| n == name).map(|i| i as u32);

        let formula = random_formula(&mut rng, &names, 4);
        let fast = check(&view, resolve, &formula).unwrap();
        let slow = ctl_naive(&adj, &labels, &resolve, &formula).unwrap();
        for (i, &expect) in slow.iter().enumerate() {
            assert_eq!(
                fast.contains(i),
                expect,
                "node {i} disagrees on {formula} in round {round}"
            );
        }
    }
}

#[test]
fn parser_roundtrip_preserves_meaning_on_random_formulas() {
    let names = ["p", "q", "r"];
    let mut rng = ChaCha8Rng::seed_from_u64(0x1111_2222);
    for _ in 0..100 {
        let formula = random_formula(&mut rng, &names, 5);
        let reparsed = ctl::parse(&formula.to_string()).unwrap();
        assert_eq!(formula, reparsed, "display changed the tree for {formula}");
    }
}
