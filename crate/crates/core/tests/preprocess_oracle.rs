mod common;

use common::{brute_mintec, random_cover_instance};
use tisched::generate::{generate_instance, GeneratorConfig};
use tisched::preprocess::{mintec, weights};

#[test]
fn mintec_matches_subset_enumeration_on_random_matrices() {
    for seed in 0..150 {
        let inst = random_cover_instance(seed, 12);
        for j in 0..inst.interventions().len() {
            assert_eq!(mintec(&inst, j), brute_mintec(&inst, j), "seed {seed} intervention {j}");
        }
    }
}

#[test]
fn twelve_technician_generated_instance() {
    let config = GeneratorConfig {
        interventions: 30,
        technicians: 12,
        domains: 4,
        levels: 3,
        max_team_size: 6,
        seed: 12,
        ..Default::default()
    };
    let inst = generate_instance(&config).unwrap();
    let pre = weights(&inst);
    assert!(pre.uncoverable.is_empty());
    for j in inst.interventions() {
        let m = brute_mintec(&inst, j.id).unwrap();
        assert_eq!(pre.mintec[j.id], Some(m));
        assert_eq!(pre.weight[j.id], m as u64 * j.duration);
    }
}
