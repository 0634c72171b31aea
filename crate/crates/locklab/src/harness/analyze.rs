//! Post-attack analyses: vote convergence, slack stratification, and
//! cone-restricted attacks.
//!
//! These read attack outputs and ground truth, so they belong to the
//! scoring side of the pipeline, never to the attacks themselves.

use serde::{Deserialize, Serialize};

use crate::locking::key_suffix;
use crate::netlist::{extract_logic_cone, structural_signature, KeyVector, Netlist};
use crate::ol::{self, DecisionPolicy, EnsembleSolution, KeyBitGuess, SolutionVector};
use crate::resynth::{generate_variants, Slack, SynthesisRecipe, VariantOptions};

use super::HarnessError;

/// Merged score after the first `n_used` solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub n_used: usize,
    pub dk: usize,
    pub cdk: usize,
}

/// X-axis choice for convergence: merge over unique structures only, or
/// over every executed recipe with duplicate structures voting again.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceBasis {
    Unique,
    All,
}

/// Scores every prefix of `solutions` against the true key. The last
/// point equals the full-ensemble merge by construction.
pub fn convergence_analysis(
    solutions: &[SolutionVector],
    truth: &KeyVector,
) -> Result<Vec<ConvergencePoint>, HarnessError> {
    if solutions.is_empty() {
        return Err(HarnessError::NoSolutions);
    }
    (1..=solutions.len())
        .map(|n| {
            let s = ol::merge_votes(&solutions[..n])?.score(truth)?;
            Ok(ConvergencePoint { n_used: n, dk: s.dk, cdk: s.cdk })
        })
        .collect()
}

/// Expands per-unique-variant solutions onto the chosen axis. `executed`
/// maps each executed recipe to the unique solution that carries its
/// structure, in execution order.
pub fn solutions_for_basis(
    unique: &[SolutionVector],
    executed: &[usize],
    basis: ConvergenceBasis,
) -> Result<Vec<SolutionVector>, HarnessError> {
    match basis {
        ConvergenceBasis::Unique => Ok(unique.to_vec()),
        ConvergenceBasis::All => executed
            .iter()
            .map(|&u| {
                unique.get(u).cloned().ok_or_else(|| {
                    HarnessError::Invariant(format!(
                        "executed recipe points at unique variant {u} of {}",
                        unique.len()
                    ))
                })
            })
            .collect(),
    }
}

/// Slack composition of the most talkative variants: how many of the
/// top-`dk` solutions came from netlists that met their depth target with
/// margin (or had none) versus tight or missed targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlackReport {
    /// Ceiling of 10% of the solution count.
    pub bucket_size: usize,
    /// Top-bucket members with positive (or absent) slack.
    pub positive: usize,
    /// Top-bucket members at or past their depth target.
    pub non_positive: usize,
}

/// Ranks solutions by decided-bit count (descending, ties broken by
/// position) and classifies the top 10% by their variant's slack.
pub fn slack_analysis(
    slacks: &[Slack],
    solutions: &[SolutionVector],
) -> Result<SlackReport, HarnessError> {
    if solutions.is_empty() {
        return Err(HarnessError::NoSolutions);
    }
    if slacks.len() != solutions.len() {
        return Err(HarnessError::Invariant(format!(
            "{} slack entries for {} solutions",
            slacks.len(),
            solutions.len()
        )));
    }
    let dk = |s: &SolutionVector| s.guesses.iter().filter(|g| g.value.is_decided()).count();
    let mut order: Vec<usize> = (0..solutions.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(dk(&solutions[i])), i));

    let bucket_size = solutions.len().div_ceil(10);
    let mut report = SlackReport { bucket_size, positive: 0, non_positive: 0 };
    for &i in &order[..bucket_size] {
        if slacks[i].is_positive() {
            report.positive += 1;
        } else {
            report.non_positive += 1;
        }
    }
    Ok(report)
}

/// Result of attacking a single output's fanin cone instead of the whole
/// netlist.
#[derive(Debug)]
pub struct ConeOutcome {
    /// The extracted cone, with key inputs renumbered but names kept.
    pub cone: Netlist,
    pub cone_gates: usize,
    pub whole_gates: usize,
    /// Original key index of each cone key input, in cone order.
    pub key_map: Vec<usize>,
    pub unique_variants: usize,
    /// Full-width verdicts: bits outside the cone stay unknown.
    pub solution: SolutionVector,
    /// Cone-width merged votes, for drill-down.
    pub ensemble: Option<EnsembleSolution>,
}

/// Restricts the oracle-less ensemble attack to the fanin cone of one
/// output. Key bits whose gates sit outside the cone are structurally
/// unreachable from it and come back unknown; everything else is attacked
/// on a netlist that can be much smaller than the whole design.
pub fn cone_mode(
    locked: &Netlist,
    protected_output: &str,
    recipes: &[SynthesisRecipe],
    policy: &DecisionPolicy,
    opts: &VariantOptions,
) -> Result<ConeOutcome, HarnessError> {
    let cone = extract_logic_cone(locked, protected_output)?;
    let key_map: Vec<usize> = cone
        .key_inputs()
        .iter()
        .map(|&k| {
            let name = cone.name(k);
            key_suffix(name).map(|s| s as usize).ok_or_else(|| {
                HarnessError::Invariant(format!("key input {name:?} has no index suffix"))
            })
        })
        .collect::<Result<_, _>>()?;
    if let Some(&bad) = key_map.iter().find(|&&i| i >= locked.key_count()) {
        return Err(HarnessError::Invariant(format!(
            "cone key index {bad} exceeds key width {}",
            locked.key_count()
        )));
    }

    let mut guesses = vec![KeyBitGuess::unknown(); locked.key_count()];
    let mut unique_variants = 0;
    let mut ensemble = None;
    if !key_map.is_empty() {
        let set = generate_variants(&cone, recipes, opts)?;
        let nets: Vec<&Netlist> = set.variants.iter().map(|v| &v.netlist).collect();
        let run = ol::attack_ensemble(&nets, policy)?;
        for (pos, merged) in run.ensemble.merged().into_iter().enumerate() {
            guesses[key_map[pos]] = merged;
        }
        unique_variants = set.variants.len();
        ensemble = Some(run.ensemble);
    }

    Ok(ConeOutcome {
        cone_gates: cone.gate_count(),
        whole_gates: locked.gate_count(),
        cone,
        key_map,
        unique_variants,
        solution: SolutionVector { guesses, source: structural_signature(locked) },
        ensemble,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locking::{lock_rll, lock_rll_at, lock_sfll_point};
    use crate::netlist::{
        generate::{random_netlist, GeneratorConfig},
        parse_bench, KeyVector, Signature,
    };
    use crate::ol::{BitValue, Score};
    use crate::resynth::{enumerate_recipes, Effort, KeyConstraint, RecipeConfig};

    fn guess(v: BitValue) -> KeyBitGuess {
        KeyBitGuess::new(v, 0.5)
    }

    fn solution(bits: &[BitValue], tag: u8) -> SolutionVector {
        SolutionVector {
            guesses: bits.iter().map(|&b| guess(b)).collect(),
            source: Signature([tag; 32]),
        }
    }

    fn small_grid() -> Vec<SynthesisRecipe> {
        let cfg = RecipeConfig {
            syn_gen: vec![Effort::Low],
            syn_map: vec![Effort::Low, Effort::Medium],
            syn_opt: crate::resynth::OptEffort::ALL[..2].to_vec(),
            delay_point: vec![crate::resynth::DelayPoint::Unconstrained],
            max_transition: vec![crate::resynth::MaxTransition::P10],
            key_constraint: KeyConstraint::ALL.to_vec(),
            seed_base: 11,
        };
        enumerate_recipes(&cfg).unwrap()
    }

    #[test]
    fn single_solution_converges_to_its_own_score() {
        use BitValue::*;
        let s = solution(&[One, Zero, Unknown, One], 1);
        let truth = KeyVector::from_bit_string("1010").unwrap();
        let pts = convergence_analysis(std::slice::from_ref(&s), &truth).unwrap();
        assert_eq!(pts, vec![ConvergencePoint { n_used: 1, dk: 3, cdk: 2 }]);
        let own = s.score(&truth).unwrap();
        assert_eq!((own.dk, own.cdk), (3, 2));
    }

    #[test]
    fn final_convergence_point_is_the_full_merge() {
        use BitValue::*;
        let solutions = vec![
            solution(&[One, Zero, Unknown], 1),
            solution(&[One, One, Zero], 2),
            solution(&[Unknown, One, Zero], 3),
            solution(&[Zero, One, Unknown], 4),
        ];
        let truth = KeyVector::from_bit_string("110").unwrap();
        let pts = convergence_analysis(&solutions, &truth).unwrap();
        assert_eq!(pts.len(), 4);
        assert!(pts.iter().enumerate().all(|(i, p)| p.n_used == i + 1));

        let full: Score = ol::merge_votes(&solutions).unwrap().score(&truth).unwrap();
        let last = *pts.last().unwrap();
        assert_eq!((last.dk, last.cdk), (full.dk, full.cdk));
        // votes: bit0 1 (2-1), bit1 1 (3-1), bit2 0 (2-0) -> dk 3, cdk 3
        assert_eq!((last.dk, last.cdk), (3, 3));
    }

    #[test]
    fn convergence_rejects_an_empty_ensemble() {
        let truth = KeyVector::zeros(3);
        assert!(matches!(
            convergence_analysis(&[], &truth),
            Err(HarnessError::NoSolutions)
        ));
    }

    #[test]
    fn basis_expansion_repeats_duplicate_structures() {
        use BitValue::*;
        let unique = vec![solution(&[One], 1), solution(&[Zero], 2)];
        let executed = [0usize, 0, 1, 0];

        let all = solutions_for_basis(&unique, &executed, ConvergenceBasis::All).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0], unique[0]);
        assert_eq!(all[2], unique[1]);
        assert_eq!(all[3], unique[0]);

        let uniq = solutions_for_basis(&unique, &executed, ConvergenceBasis::Unique).unwrap();
        assert_eq!(uniq, unique);

        assert!(matches!(
            solutions_for_basis(&unique, &[5], ConvergenceBasis::All),
            Err(HarnessError::Invariant(_))
        ));
    }

    #[test]
    fn ten_solutions_give_a_bucket_of_one() {
        use BitValue::*;
        // dk counts 0..=9; index 9 has the most decided bits
        let solutions: Vec<SolutionVector> = (0..10)
            .map(|i| {
                let bits: Vec<BitValue> =
                    (0..9).map(|b| if b < i { One } else { Unknown }).collect();
                solution(&bits, i as u8)
            })
            .collect();
        let mut slacks = vec![Slack::Levels(-1); 10];
        slacks[9] = Slack::Levels(2);

        let r = slack_analysis(&slacks, &solutions).unwrap();
        assert_eq!(r, SlackReport { bucket_size: 1, positive: 1, non_positive: 0 });
    }

    #[test]
    fn all_positive_slack_fills_one_class() {
        use BitValue::*;
        let solutions: Vec<SolutionVector> =
            (0..7).map(|i| solution(&[One, Zero], i as u8)).collect();
        let slacks = vec![
            Slack::Unconstrained,
            Slack::Levels(1),
            Slack::Levels(3),
            Slack::Unconstrained,
            Slack::Levels(9),
            Slack::Levels(2),
            Slack::Levels(1),
        ];
        let r = slack_analysis(&slacks, &solutions).unwrap();
        assert_eq!(r.bucket_size, 1);
        assert_eq!((r.positive, r.non_positive), (1, 0));
    }

    #[test]
    fn slack_buckets_match_an_independent_recount() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..60 {
            let n = rng.gen_range(1..40);
            let solutions: Vec<SolutionVector> = (0..n)
                .map(|i| {
                    let bits: Vec<BitValue> = (0..8)
                        .map(|_| match rng.gen_range(0..3) {
                            0 => BitValue::Zero,
                            1 => BitValue::One,
                            _ => BitValue::Unknown,
                        })
                        .collect();
                    solution(&bits, i as u8)
                })
                .collect();
            let slacks: Vec<Slack> = (0..n)
                .map(|_| match rng.gen_range(0..3) {
                    0 => Slack::Unconstrained,
                    1 => Slack::Levels(rng.gen_range(-4..=6)),
                    _ => Slack::Levels(0),
                })
                .collect();

            let r = slack_analysis(&slacks, &solutions).unwrap();

            // recount from scratch with a plain stable sort
            let dk: Vec<usize> = solutions
                .iter()
                .map(|s| s.guesses.iter().filter(|g| g.value.is_decided()).count())
                .collect();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| dk[b].cmp(&dk[a]));
            let k = n.div_ceil(10);
            let pos = idx[..k].iter().filter(|&&i| slacks[i].is_positive()).count();
            assert_eq!(r.bucket_size, k);
            assert_eq!(r.positive, pos);
            assert_eq!(r.non_positive, k - pos);
            assert_eq!(r.positive + r.non_positive, r.bucket_size);
        }
    }

    #[test]
    fn slack_shape_errors_are_reported() {
        let s = solution(&[BitValue::One], 0);
        assert!(matches!(
            slack_analysis(&[], &[]),
            Err(HarnessError::NoSolutions)
        ));
        assert!(matches!(
            slack_analysis(&[Slack::Unconstrained, Slack::Levels(0)], std::slice::from_ref(&s)),
            Err(HarnessError::Invariant(_))
        ));
    }

    #[test]
    fn cone_of_a_single_output_matches_the_whole_circuit_attack() {
        let base = random_netlist(&GeneratorConfig::sized(8, 1, 60, 77));
        let locked = lock_rll(&base, 4, 5).unwrap().netlist;
        let recipes = small_grid();
        let policy = DecisionPolicy::default();
        let output = locked.name(locked.outputs()[0]).to_string();

        let cone = cone_mode(&locked, &output, &recipes, &policy, &VariantOptions::default())
            .unwrap();
        assert_eq!(cone.key_map, vec![0, 1, 2, 3]);

        let set = generate_variants(&locked, &recipes, &VariantOptions::default()).unwrap();
        let nets: Vec<&Netlist> = set.variants.iter().map(|v| &v.netlist).collect();
        let whole = ol::attack_ensemble(&nets, &policy).unwrap();

        // one output means the cone sees every key gate, so the verdicts
        // must agree bit for bit
        assert_eq!(cone.solution.guesses.len(), 4);
        for (c, w) in cone.solution.guesses.iter().zip(whole.ensemble.merged()) {
            assert_eq!(c.value, w.value);
        }
        assert!(cone.unique_variants >= 1);
    }

    #[test]
    fn keys_outside_the_cone_stay_unknown() {
        let base = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nOUTPUT(f)\nOUTPUT(g)\n\
             t1 = AND(a, b)\nu1 = NOT(t1)\nf = OR(u1, b)\n\
             t2 = OR(c, d)\nu2 = NOT(t2)\ng = AND(u2, c)\n",
        )
        .unwrap();
        let locked = lock_rll_at(&base, &["t1", "t2"], &[true, false]).unwrap().netlist;

        let cone = cone_mode(
            &locked,
            "f",
            &small_grid(),
            &DecisionPolicy::default(),
            &VariantOptions::default(),
        )
        .unwrap();
        assert_eq!(cone.key_map, vec![0]);
        assert_eq!(cone.solution.guesses.len(), 2);
        assert_eq!(cone.solution.guesses[1].value, BitValue::Unknown);
        assert_eq!(cone.solution.guesses[1].confidence, 0.0);
        assert!(cone.cone_gates < cone.whole_gates);
    }

    #[test]
    fn point_lock_cones_are_much_smaller_than_the_design() {
        let base = random_netlist(&GeneratorConfig::sized(16, 4, 150, 9));
        let lock = lock_sfll_point(&base, 8, 21).unwrap();
        let protected = lock.record.protected_output.clone().unwrap();

        let cone = cone_mode(
            &lock.netlist,
            &protected,
            &small_grid()[..2],
            &DecisionPolicy::default(),
            &VariantOptions::default(),
        )
        .unwrap();
        assert_eq!(cone.key_map.len(), 8, "point lock keys all live in one cone");
        assert!(
            cone.cone_gates < cone.whole_gates,
            "cone {} gates vs whole {}",
            cone.cone_gates,
            cone.whole_gates
        );
    }

    #[test]
    fn cone_without_keys_skips_the_attack() {
        let base = parse_bench(
            "INPUT(a)\nINPUT(b)\nOUTPUT(f)\nOUTPUT(g)\n\
             t = AND(a, b)\nf = NOT(t)\ng = OR(a, b)\n",
        )
        .unwrap();
        let locked = lock_rll_at(&base, &["t"], &[true]).unwrap().netlist;
        let cone = cone_mode(
            &locked,
            "g",
            &small_grid(),
            &DecisionPolicy::default(),
            &VariantOptions::default(),
        )
        .unwrap();
        assert!(cone.key_map.is_empty());
        assert_eq!(cone.unique_variants, 0);
        assert!(cone.ensemble.is_none());
        assert!(cone.solution.guesses.iter().all(|g| g.value == BitValue::Unknown));
    }

    #[test]
    fn unknown_output_is_a_cone_error() {
        let base = random_netlist(&GeneratorConfig::sized(6, 2, 30, 3));
        let locked = lock_rll(&base, 2, 1).unwrap().netlist;
        let err = cone_mode(
            &locked,
            "no_such_output",
            &small_grid(),
            &DecisionPolicy::default(),
            &VariantOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::Netlist(_)));
    }
}
