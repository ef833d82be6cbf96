mod common;

use common::{exhaustive, load, manifest, program, Case};
use witness_contracts::csrc::parse_program;
use witness_contracts::instrument::{emit_c, instrument_program};
use witness_contracts::lint::lint_witness;
use witness_contracts::lower::lower_to_v20;
use witness_contracts::validate::{validate, Verdict};
use witness_contracts::witness::{parse_witness, serialize_witness, ParseOptions};

fn check_verdict(case: &Case, verdict: &Verdict) {
    let name = &case.name;
    assert_eq!(
        Some(verdict.name()),
        case.verdict.as_deref(),
        "{name}: {:?}",
        verdict.to_json()
    );
    if let Some(i) = case.entry_index {
        assert_eq!(verdict.failure().and_then(|f| f.entry_index()), Some(i), "{name}");
    }
    if let Some(c) = &case.clause {
        assert_eq!(verdict.failure().map(|f| f.label()), Some(c.as_str()), "{name}");
    }
    if let Some(v) = &case.input_vector {
        let Verdict::Violated { input_vector, .. } = verdict else {
            panic!("{name}: not violated")
        };
        assert_eq!(input_vector, v, "{name}");
    }
}

#[test]
fn manifest_sizes() {
    let m = manifest();
    assert!(m.v20.len() >= 10);
    assert!(m.contracts.iter().filter(|c| load(c).0.entries.len() == 2).count() >= 20);
    assert!(
        m.lowering
            .iter()
            .filter(|c| !c.residue.as_ref().unwrap().is_empty())
            .count()
            >= 5
    );
}

#[test]
fn clean_cases_have_no_diagnostics() {
    for case in manifest().clean() {
        let (w, p) = load(case);
        let codes: Vec<_> = lint_witness(&w, &p).iter().map(|d| d.code).collect();
        // This one keeps a contract whose clauses are both "1", on purpose.
        let expected: &[&str] = if case.name == "max_returns" {
            &["TAUTOLOGY"]
        } else {
            &[]
        };
        assert_eq!(codes, expected, "{}", case.name);
    }
}

#[test]
fn v20_verdicts() {
    for case in manifest().v20 {
        let (w, p) = load(&case);
        assert_eq!(w.metadata.format_version, "2.0");
        check_verdict(&case, &validate(&p, &w, &exhaustive()));
    }
}

#[test]
fn contract_verdicts() {
    for case in manifest().contracts {
        let (w, p) = load(&case);
        check_verdict(&case, &validate(&p, &w, &exhaustive()));
    }
}

#[test]
fn empty_witness_verdicts() {
    for case in manifest().empty {
        let (w, p) = load(&case);
        assert!(w.entries.is_empty());
        check_verdict(&case, &validate(&p, &w, &exhaustive()));
    }
}

#[test]
fn violations_replay() {
    for case in manifest()
        .contracts
        .iter()
        .filter(|c| c.verdict.as_deref() == Some("violated"))
    {
        let (w, p) = load(case);
        let v = witness_contracts::validate::Validator::new(&p, &w, Default::default(), Default::default()).unwrap();
        let verdict = v.run(exhaustive().strategy, Default::default());
        let Verdict::Violated {
            failure,
            input_vector,
            trace,
            ..
        } = &verdict
        else {
            panic!()
        };
        let again = v.replay(input_vector, true);
        assert_eq!(
            again.outcome,
            witness_contracts::validate::Outcome::Violated(*failure),
            "{}",
            case.name
        );
        assert_eq!(&again.trace, trace, "{}", case.name);
    }
}

#[test]
fn lint_rules_fire_exactly() {
    for case in manifest().lint {
        let (w, p) = load(&case);
        let codes: Vec<_> = lint_witness(&w, &p).iter().map(|d| d.code).collect();
        let rule = case.rule.as_deref().unwrap();
        if case.fires.unwrap() {
            assert_eq!(codes, [rule], "{}", case.name);
        } else {
            assert!(codes.is_empty(), "{}: {codes:?}", case.name);
        }
    }
}

#[test]
fn lowering_residue_codes() {
    for case in manifest().lowering {
        let (w, p) = load(&case);
        let l = lower_to_v20(&w, &p).unwrap();
        let codes: Vec<_> = l.residue.residue.iter().map(|r| r.reason.code()).collect();
        assert_eq!(codes, *case.residue.as_ref().unwrap(), "{}", case.name);
        assert_eq!(l.witness.entries.len(), case.lowered_entries.unwrap(), "{}", case.name);
        assert!(
            !lint_witness(&l.witness, &p).iter().any(|d| d.is_error()),
            "{}",
            case.name
        );
        let reparsed = parse_witness(&serialize_witness(&l.witness), ParseOptions::default()).unwrap();
        assert_eq!(reparsed.witness, l.witness);
    }
}

#[test]
fn instrumented_programs_reparse() {
    for case in manifest().clean() {
        let (w, p) = load(case);
        let inst = instrument_program(&p, &w).unwrap();
        let text = emit_c(&inst.program);
        let back = parse_program(&text).unwrap_or_else(|d| panic!("{}: {d:?}\n{text}", case.name));
        assert_eq!(back.normalized(), inst.program.normalized(), "{}", case.name);
    }
}

#[test]
fn instrumentation_is_idempotent_on_emitted_text() {
    let m = manifest();
    let case = m.contracts.iter().find(|c| c.name == "divide_ok").unwrap();
    let (w, p) = load(case);
    let first = emit_c(&instrument_program(&p, &w).unwrap().program);
    let second = emit_c(&parse_program(&first).unwrap());
    assert_eq!(first, second);
}

#[test]
fn programs_parse() {
    for entry in std::fs::read_dir(common::corpus_dir().join("programs")).unwrap() {
        let name = entry.unwrap().file_name().to_string_lossy().into_owned();
        program(&format!("programs/{name}"));
    }
}

/// Whenever the lowered witness fails on a vector, the original fails on it too.
#[test]
fn lowering_is_sound_per_vector() {
    use witness_contracts::validate::{Outcome, Validator};
    let m = manifest();
    let mut checked = 0;
    for case in m.contracts.iter().chain(&m.lowering) {
        let (w, p) = load(case);
        let lowered = lower_to_v20(&w, &p).unwrap();
        let original = Validator::new(&p, &w, Default::default(), Default::default()).unwrap();
        let low = Validator::new(&p, &lowered.witness, Default::default(), Default::default()).unwrap();
        for r in low.enumerate(exhaustive().strategy) {
            if let Outcome::Violated(f) = r.outcome {
                let again = original.replay(&r.inputs, false);
                assert!(
                    matches!(again.outcome, Outcome::Violated(_)),
                    "{}: lowered fails {f:?} on {:?}, original gives {:?}",
                    case.name,
                    r.inputs,
                    again.outcome
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}
