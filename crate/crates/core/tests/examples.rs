//! Worked examples across the public API. Expected values come from published
//! figures, hand ledgers (shown in comments) or an independent brute force.

use kvsched::analysis::{
    area, brute_force_opt, ceiling_inequality_holds, max_parallelism, opt_lb_multiclass,
    opt_lb_single, peak_memory, spacing::spacing_holds, spacing_check, theorem_bound, AnalysisError,
    BoundKind,
};
use kvsched::engine::simulate;
use kvsched::export::{
    read_instance_csv, read_kills_csv, read_timeline_csv, write_completions_csv,
    write_instance_csv, write_kills_csv, write_timeline_csv,
};
use kvsched::rational::{from_u64, ratio};
use kvsched::schedulers::{self, sps_plan, GeometricConfig, PolicyKind, SchedulerError, StaticPlan};
use kvsched::timeline::ActiveJob;
use kvsched::workloads::{
    self, gen_identical, gen_long_job_trap, gen_sims_adversarial, gen_two_point, load_trace,
    round_pow2, SimsFamily,
};
use kvsched::{
    memory_profile, total_flow_time, validate_instance, verify_feasibility, Instance, ModelError,
    Timeline, Violation,
};

fn flow(tl: Timeline) -> u64 {
    total_flow_time(&tl).unwrap()
}

#[test]
fn instance_validation() {
    assert!(gen_identical(15, 0, 5, 15).is_ok());
    assert!(gen_identical(1, 0, 1, 1).is_ok());
    assert!(matches!(
        Instance::new(96, 256, &[161]),
        Err(ModelError::InfeasibleJob { id: 0, .. })
    ));
    assert!(matches!(Instance::new(0, 5, &[]), Err(ModelError::EmptyInstance)));
    assert!(matches!(Instance::new(0, 0, &[1]), Err(ModelError::NonPositiveBudget)));
    let inst = Instance::from_lengths(0, 3, &[1, 2]);
    assert_eq!(validate_instance(inst.clone()).unwrap(), inst);
}

#[test]
fn pipeline_example_staircase() {
    let inst = gen_identical(15, 0, 5, 15).unwrap();
    let tl = schedulers::sps(&inst, 5, 5).unwrap();
    assert_eq!(tl.final_starts(), (0..15).map(Some).collect::<Vec<_>>());
    // Job j runs rounds j..j+4 holding u+1 units; from round 4 through 14 five
    // jobs overlap at progress 0..4, i.e. 1+2+3+4+5.
    let profile = memory_profile(&tl, &inst);
    assert_eq!(&profile[..4], &[1, 3, 6, 10]);
    assert!(profile[4..=13].iter().all(|&m| m == 15));
    assert_eq!(flow(tl.clone()), 180);
    assert!(spacing_check(&tl, &inst).unwrap());

    let sims = schedulers::sims(&inst).unwrap();
    assert_eq!(flow(sims), 225);
}

#[test]
fn lone_job_and_memory_profile() {
    let inst = Instance::new(2, 10, &[3]).unwrap();
    let tl = schedulers::mc_sf(&inst).unwrap();
    assert_eq!(memory_profile(&tl, &inst), vec![3, 4, 5]);
    assert_eq!(flow(tl), 3);
}

#[test]
fn hand_built_overlap_is_reported() {
    // Both jobs run rounds 0 and 1: 1 + 1 then 2 + 2 > 3.
    let inst = Instance::new(0, 3, &[2, 2]).unwrap();
    let both = |u| vec![ActiveJob { id: 0, progress: u }, ActiveJob { id: 1, progress: u }];
    let tl = Timeline {
        rounds: vec![both(0), both(1)],
        completions: vec![Some(2), Some(2)],
        kills: Vec::new(),
    };
    let report = verify_feasibility(&tl, &inst);
    assert_eq!(report.violations.len(), 1);
    assert!(matches!(
        report.violations[0],
        Violation::MemoryExceeded { round: 1, used: 4, budget: 3, .. }
    ));
}

#[test]
fn progress_kept_after_kill_is_reported() {
    let inst = Instance::new(0, 10, &[3]).unwrap();
    let tl = Timeline {
        rounds: vec![
            vec![ActiveJob { id: 0, progress: 0 }],
            vec![],
            vec![ActiveJob { id: 0, progress: 1 }],
            vec![ActiveJob { id: 0, progress: 2 }],
        ],
        completions: vec![Some(4)],
        kills: vec![kvsched::timeline::KillEvent { round: 1, job: 0 }],
    };
    let report = verify_feasibility(&tl, &inst);
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::ProgressUpdateBroken { round: 2, job: 0, .. })));
}

#[test]
fn pipeline_plans() {
    let starts = |n: usize, k, tau| -> Vec<u64> {
        let ids: Vec<usize> = (0..n).collect();
        sps_plan(&ids, k, tau).slots.iter().map(|s| s.start).collect()
    };
    assert_eq!(starts(15, 5, 5), (0..15).collect::<Vec<u64>>());
    // floor(5j/3) for j = 0..6.
    assert_eq!(starts(7, 3, 5), vec![0, 1, 3, 5, 6, 8, 10]);
    let one = sps_plan(&[0], 1, 9);
    assert_eq!((one.slots[0].start, one.slots[0].end), (0, 9));
}

#[test]
fn geometric_slices_for_budget_256() {
    let cfg = GeometricConfig::new(&from_u64(2), 256).unwrap();
    assert_eq!(cfg.ell, 8);
    assert_eq!(cfg.beta, from_u64(1));
    assert_eq!(cfg.slice_int, vec![1, 2, 4, 8, 16, 32, 64, 128, 256]);
}

#[test]
fn batching_examples() {
    let two = from_u64(2);
    let inst = gen_identical(200, 0, 16, 256).unwrap();
    assert_eq!(flow(schedulers::gba(&inst, &two).unwrap()), 14083);
    assert_eq!(flow(schedulers::mc_sf(&inst).unwrap()), 21632);
    let lone = Instance::new(0, 16, &[5]).unwrap();
    assert_eq!(flow(schedulers::gba(&lone, &two).unwrap()), 5);
    assert_eq!(flow(schedulers::gba_d(&lone, &two).unwrap()), 5);
}

#[test]
fn slicing_examples() {
    let two = from_u64(2);
    let lone = Instance::new(0, 2, &[1]).unwrap();
    assert_eq!(flow(schedulers::gsa(&lone, &two, None).unwrap()), 1);

    let trap = gen_long_job_trap(8, 10).unwrap();
    let sliced = flow(schedulers::gsa(&trap, &two, None).unwrap());
    assert!(sliced <= 35 + 8 + 2046);
    assert_eq!(workloads::long_job_trap_gsa_bound(8, 10), 2089);
}

#[test]
fn two_point_long_first() {
    let inst = gen_two_point(194, 1, 6, 160, 96, 256).unwrap();
    assert_eq!(&inst.lengths()[..7], &[160, 160, 160, 160, 160, 160, 1]);
    let tl = schedulers::gsa(&inst, &from_u64(2), None).unwrap();
    assert!(verify_feasibility(&tl, &inst).is_feasible());
    // Every long job is killed in each phase shorter than 160.
    let cfg = GeometricConfig::for_instance(&inst, &from_u64(2), None).unwrap();
    let short_phases = cfg.slice_int.iter().filter(|&&t| t < 160).count();
    assert_eq!(tl.kills.len(), 6 * short_phases);
}

#[test]
fn simultaneous_batches() {
    let inst = Instance::new(0, 4, &[4]).unwrap();
    assert_eq!(flow(schedulers::sims(&inst).unwrap()), 4);
    let mixed = Instance::new(0, 8, &[1, 2]).unwrap();
    assert_eq!(schedulers::sims(&mixed).unwrap_err(), SchedulerError::NonIdenticalJobs);
}

#[test]
fn stagger_by_one_on_tight_pair() {
    // Job 0 runs at 0..1 (1, 2 units), job 1 joins at 1 (1 unit): 2 + 1 = 3.
    let inst = Instance::new(0, 3, &[2, 2]).unwrap();
    assert_eq!(flow(schedulers::mc_sf(&inst).unwrap()), 5);
    assert_eq!(flow(schedulers::vllm_fcfs(&inst).unwrap()), 5);
    assert_eq!(brute_force_opt(&inst, None).unwrap().flow, 5);
}

#[test]
fn learning_baseline_examples() {
    let roomy = gen_identical(6, 1, 4, 6 * 5).unwrap();
    let tl = schedulers::a_min(&roomy, 9).unwrap();
    assert_eq!(tl.final_starts(), vec![Some(0); 6]);
    assert_eq!(flow(tl), 24);
    let lone = Instance::new(3, 10, &[7]).unwrap();
    let tl = schedulers::a_min(&lone, 1).unwrap();
    assert!(tl.kills.is_empty());
    assert_eq!(flow(tl), 7);
}

#[test]
fn formula_examples() {
    assert_eq!(peak_memory(5, 5, 0), 15);
    assert_eq!(peak_memory(1, 9, 4), 13);
    assert_eq!(peak_memory(7, 1, 3), 28);
    assert_eq!(max_parallelism(5, 0, 15).unwrap(), 5);
    assert_eq!(max_parallelism(1, 96, 256).unwrap(), 2);
    let scan = (1..=40u64).filter(|&k| peak_memory(k, 16, 0) <= 256).max().unwrap();
    assert_eq!(max_parallelism(16, 0, 256).unwrap(), scan);
    assert_eq!(scan, 29);
    assert_eq!(
        max_parallelism(10, 5, 14),
        Err(AnalysisError::Infeasible { tau: 10, s: 5, budget: 14 })
    );
    assert_eq!(area(5, 0), 15);
    assert_eq!(area(1, 7), 8);
    assert_eq!(area(160, 96), 96 * 160 + 160 * 161 / 2);
    assert_eq!(opt_lb_single(15, 5, 0, 15), from_u64(120));
    assert_eq!(opt_lb_single(200, 16, 0, 256), ratio(200 * 201 / 2 * 136, 256));
    assert!(ceiling_inequality_holds(4, 2));
    assert!(ceiling_inequality_holds(1, 1));
}

#[test]
fn theorem_constants() {
    assert_eq!(theorem_bound(BoundKind::Gba, &ratio(4, 3), Some(1)), ratio(32, 3));
    assert_eq!(theorem_bound(BoundKind::Gba, &ratio(3, 2), None), ratio(27, 4));
    assert_eq!(theorem_bound(BoundKind::Gsa, &from_u64(2), None), from_u64(32));
}

#[test]
fn oracle_examples() {
    let three = Instance::new(0, 6, &[2, 2, 2]).unwrap();
    assert_eq!(brute_force_opt(&three, None).unwrap().flow, 6);
    let lone = Instance::new(0, 9, &[9]).unwrap();
    assert_eq!(brute_force_opt(&lone, None).unwrap().flow, 9);

    let small = gen_long_job_trap(4, 3).unwrap();
    assert_eq!(brute_force_opt(&small, None).unwrap().flow, workloads::long_job_trap_opt(4, 3));
    assert_eq!(workloads::long_job_trap_opt(8, 10), 1059);

    let mixed = Instance::new(0, 8, &[1, 4]).unwrap();
    let report = opt_lb_multiclass(&mixed, &from_u64(2), None).unwrap();
    let opt = brute_force_opt(&mixed, None).unwrap().flow;
    assert!(report.opt_lb <= from_u64(opt));
    assert_eq!(report.opt_lb, &report.within_class + &report.between_classes);

    let big = gen_identical(9, 0, 1, 9).unwrap();
    assert!(matches!(brute_force_opt(&big, None), Err(AnalysisError::GuardRail { .. })));
}

#[test]
fn spacing_on_optimal_and_broken_schedules() {
    let inst = gen_identical(6, 0, 4, 8).unwrap();
    let sol = brute_force_opt(&inst, None).unwrap();
    let tl = simulate(&inst, &mut StaticPlan::new("opt", &sol.starts)).unwrap();
    assert!(spacing_check(&tl, &inst).unwrap());

    // k* = 2 and the gap must be 2; starting three jobs within one round
    // breaks it, and the ledger overflows at round 3 (4 + 4 + 3 > 8).
    assert!(!spacing_holds(&[0, 0, 1], 4, 0, 8).unwrap());
    let row = |jobs: &[(usize, u64)]| -> Vec<ActiveJob> {
        jobs.iter().map(|&(id, progress)| ActiveJob { id, progress }).collect()
    };
    let three = gen_identical(3, 0, 4, 8).unwrap();
    let tl = Timeline {
        rounds: vec![
            row(&[(0, 0), (1, 0)]),
            row(&[(0, 1), (1, 1), (2, 0)]),
            row(&[(0, 2), (1, 2), (2, 1)]),
            row(&[(0, 3), (1, 3), (2, 2)]),
            row(&[(2, 3)]),
        ],
        completions: vec![Some(4), Some(4), Some(5)],
        kills: Vec::new(),
    };
    assert!(!verify_feasibility(&tl, &three).is_feasible());

    let mixed = Instance::new(0, 8, &[1, 2]).unwrap();
    let tl = schedulers::mc_sf(&mixed).unwrap();
    assert_eq!(spacing_check(&tl, &mixed), Err(AnalysisError::NonIdenticalJobs));
}

#[test]
fn workload_generators() {
    let degenerate = gen_two_point(0, 1, 3, 5, 0, 5).unwrap();
    assert_eq!(degenerate.identical_len(), Some(5));
    assert_eq!(gen_two_point(1, 1, 1, 2, 0, 4).unwrap().lengths(), vec![2, 1]);

    let trap = gen_long_job_trap(2, 1).unwrap();
    assert_eq!((trap.prompt_len, trap.memory_budget, trap.lengths()), (2, 4, vec![2, 1]));

    let lb2 = gen_sims_adversarial(SimsFamily::NearTwo { o: 8, batch: 8, n: 256 }).unwrap();
    assert_eq!((lb2.memory_budget, lb2.n()), (64, 256));
    let lb3 = gen_sims_adversarial(SimsFamily::NearThree { o: 30, delta: 2, n: 60 }).unwrap();
    assert_eq!(lb3.memory_budget, 57);
    assert!(gen_sims_adversarial(SimsFamily::NearThree { o: 30, delta: 1, n: 60 }).is_err());

    let r = |s, m, l: &[u64]| round_pow2(&Instance::new(s, m, l).unwrap()).unwrap().lengths();
    assert_eq!(r(0, 8, &[3, 4, 5]), vec![4, 4, 8]);
    assert_eq!(r(0, 1, &[1]), vec![1]);
    assert_eq!(r(0, 128, &[100]), vec![128]);
    assert!(round_pow2(&Instance::new(0, 6, &[5]).unwrap()).is_err());
}

#[test]
fn fixture_trace_loads_in_order() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/heavy_tail_lengths.txt");
    let (inst, report) = load_trace(path, 79, 8192, None).unwrap();
    assert_eq!(inst.n(), 1000);
    assert_eq!(report.accepted, 1000);
    let (head, _) = load_trace(path, 79, 8192, Some(10)).unwrap();
    assert_eq!(head.lengths(), inst.lengths()[..10].to_vec());
    assert_eq!(load_trace(path, 79, 8192, None).unwrap().0, inst);
}

#[test]
fn csv_round_trip() {
    let inst = gen_two_point(12, 1, 2, 9, 2, 16).unwrap();
    let tl = schedulers::gsa_spec(&inst, &ratio(3, 2), None).unwrap();
    assert!(!tl.kills.is_empty());

    let mut buf = Vec::new();
    write_instance_csv(&inst, &mut buf).unwrap();
    assert_eq!(read_instance_csv(buf.as_slice()).unwrap(), inst);

    let mut timeline = Vec::new();
    write_timeline_csv(&tl, &inst, &mut timeline).unwrap();
    let mut kills = Vec::new();
    write_kills_csv(&tl, &mut kills).unwrap();
    let kills = read_kills_csv(kills.as_slice()).unwrap();
    assert_eq!(kills, tl.kills);
    let back = read_timeline_csv(timeline.as_slice(), &inst, Some(&kills)).unwrap();
    assert_eq!(back, tl);

    let mut completions = Vec::new();
    write_completions_csv(&tl, &inst, &mut completions).unwrap();
    let text = String::from_utf8(completions).unwrap();
    assert!(text.starts_with("job_id,response_len,completion_round\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), inst.n() + 1);
}

#[test]
fn every_policy_name_parses() {
    for kind in PolicyKind::ALL {
        assert_eq!(kind.as_str().parse::<PolicyKind>().unwrap(), kind);
    }
    assert!("fifo".parse::<PolicyKind>().is_err());
}
