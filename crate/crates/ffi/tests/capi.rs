use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use seqteach_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        seqteach_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn vocabulary_and_learner_lifecycle() {
    unsafe {
        let mut v = ptr::null_mut();
        assert_eq!(
            seqteach_vocabulary_synthetic(40, 0.2, 3, &mut v),
            SeqteachStatus::Ok
        );
        assert_eq!(seqteach_vocabulary_len(v), 40);

        let mut l = ptr::null_mut();
        assert_eq!(seqteach_learner_new(1, &mut l), SeqteachStatus::Ok);
        let test: Vec<usize> = (0..40).collect();
        let mut before = -1.0;
        assert_eq!(
            seqteach_learner_terminal_cost(l, v, test.as_ptr(), test.len(), &mut before),
            SeqteachStatus::Ok
        );
        assert!((0.0..=1.0).contains(&before));

        let seq: Vec<usize> = (0..400).map(|t| t % 2).collect();
        assert_eq!(
            seqteach_learner_train(l, v, seq.as_ptr(), seq.len()),
            SeqteachStatus::Ok
        );
        let mut after = -1.0;
        let first_two = [0usize, 1];
        assert_eq!(
            seqteach_learner_terminal_cost(l, v, first_two.as_ptr(), 2, &mut after),
            SeqteachStatus::Ok
        );
        assert_eq!(after, 0.0);

        let bad = [99usize];
        assert_eq!(
            seqteach_learner_train(l, v, bad.as_ptr(), 1),
            SeqteachStatus::InvalidArgument
        );
        assert!(last_error().contains("out of range"));
        assert_eq!(
            seqteach_learner_terminal_cost(l, v, test.as_ptr(), 0, &mut after),
            SeqteachStatus::RuntimeError
        );

        seqteach_learner_free(l);
        seqteach_vocabulary_free(v);
        seqteach_learner_free(ptr::null_mut());
        seqteach_vocabulary_free(ptr::null_mut());
    }
}

#[test]
fn error_codes() {
    unsafe {
        assert_eq!(
            seqteach_vocabulary_synthetic(40, 0.2, 3, ptr::null_mut()),
            SeqteachStatus::NullPointer
        );
        assert!(last_error().contains("null"));
        let mut v = ptr::null_mut();
        assert_eq!(
            seqteach_vocabulary_synthetic(10_000_000, 0.2, 3, &mut v),
            SeqteachStatus::InvalidArgument
        );
        assert!(v.is_null());
        let tsv = c"word\tphonemes\ncat\tk @ t\nhmm\th m m\n";
        assert_eq!(
            seqteach_vocabulary_parse(tsv.as_ptr(), &mut v),
            SeqteachStatus::DataError
        );
        let ok = c"word\tphonemes\ncat\tk @ t\n";
        assert_eq!(
            seqteach_vocabulary_parse(ok.as_ptr(), &mut v),
            SeqteachStatus::Ok
        );
        assert_eq!(seqteach_vocabulary_len(v), 1);
        assert_eq!(last_error(), "");
        seqteach_vocabulary_free(v);
    }
}

#[test]
fn statistics() {
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let ys = [2.0, 1.0, 4.0, 3.0, 5.0];
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            seqteach_spearman(xs.as_ptr(), ys.as_ptr(), 5, &mut a, &mut b),
            SeqteachStatus::Ok
        );
        assert!((a - 0.8).abs() < 1e-12);
        assert_eq!(
            seqteach_welch_t_test(xs.as_ptr(), 5, xs.as_ptr(), 5, &mut a, &mut b),
            SeqteachStatus::Ok
        );
        assert_eq!((a, b), (0.0, 1.0));
        assert_eq!(
            seqteach_spearman(ptr::null(), ys.as_ptr(), 5, &mut a, &mut b),
            SeqteachStatus::NullPointer
        );
        let c = [1.0, 1.0, 1.0];
        assert_eq!(
            seqteach_spearman(c.as_ptr(), ys.as_ptr(), 3, &mut a, &mut b),
            SeqteachStatus::RuntimeError
        );
        assert_eq!(
            CStr::from_ptr(seqteach_version()).to_str().unwrap(),
            env!("CARGO_PKG_VERSION")
        );
    }
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(manifest_dir().join("include/seqteach.h")).unwrap();
    for name in [
        "seqteach_last_error",
        "seqteach_vocabulary_synthetic",
        "seqteach_vocabulary_parse",
        "seqteach_vocabulary_len",
        "seqteach_vocabulary_free",
        "seqteach_learner_new",
        "seqteach_learner_free",
        "seqteach_learner_train",
        "seqteach_learner_terminal_cost",
        "seqteach_spearman",
        "seqteach_welch_t_test",
        "seqteach_version",
        "typedef struct SeqteachVocabulary SeqteachVocabulary",
        "SEQTEACH_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/capi-<hash> -> target/<profile>
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libseqteach_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_against_static_library() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not built; skipping C link check");
        return;
    };
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler; skipping C link check");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "seqteach.h"
int main(void) {
    SeqteachVocabulary *v = NULL;
    if (seqteach_vocabulary_synthetic(50, 0.2, 7, &v) != SEQTEACH_STATUS_OK) return 1;
    SeqteachLearner *l = NULL;
    if (seqteach_learner_new(1, &l) != SEQTEACH_STATUS_OK) return 2;
    size_t seq[3] = {0, 1, 2};
    if (seqteach_learner_train(l, v, seq, 3) != SEQTEACH_STATUS_OK) return 3;
    double cost = -1.0;
    if (seqteach_learner_terminal_cost(l, v, seq, 3, &cost) != SEQTEACH_STATUS_OK) return 4;
    if (seqteach_learner_train(NULL, v, seq, 3) != SEQTEACH_STATUS_NULL_POINTER) return 5;
    char buf[64];
    if (seqteach_last_error(buf, sizeof buf) == 0) return 6;
    printf("%zu %.3f %s\n", seqteach_vocabulary_len(v), cost, seqteach_version());
    seqteach_learner_free(l);
    seqteach_vocabulary_free(v);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "C program exited with {:?}",
        out.status
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("50 "), "{text}");
}

fn which_cc() -> Result<PathBuf, ()> {
    for name in ["cc", "gcc", "clang"] {
        for dir in std::env::var_os("PATH")
            .ok_or(())?
            .to_string_lossy()
            .split(':')
        {
            let p = Path::new(dir).join(name);
            if p.exists() {
                return Ok(p);
            }
        }
    }
    Err(())
}
