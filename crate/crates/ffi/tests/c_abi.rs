use std::ffi::{CStr, CString};
use std::ptr;

use swcoref_ffi::*;

const CORPUS: &str = r#"{"kind":"sentence","doc_id":"D1","sent_id":"S1","text":"We used MATLAB for analysis."}
{"kind":"sentence","doc_id":"D1","sent_id":"S2","text":"Plots were made in matlab and SPSS."}
{"kind":"sentence","doc_id":"D2","sent_id":"S1","text":"Statistics were run in SPSS 25."}
{"kind":"mention","mention_id":"M1","doc_id":"D1","sent_id":"S1","text":"MATLAB","start_char":8,"end_char":14,"gold_cluster":"C1"}
{"kind":"mention","mention_id":"M2","doc_id":"D1","sent_id":"S2","text":"matlab","start_char":19,"end_char":25,"gold_cluster":"C1"}
{"kind":"mention","mention_id":"M3","doc_id":"D1","sent_id":"S2","text":"SPSS","start_char":30,"end_char":34,"gold_cluster":"C2"}
{"kind":"mention","mention_id":"M4","doc_id":"D2","sent_id":"S1","text":"SPSS 25","start_char":23,"end_char":30,"gold_cluster":"C2"}
"#;

fn last_error() -> String {
    let p = swc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load() -> *mut SwcCorpus {
    let text = CString::new(CORPUS).unwrap();
    let mut corpus = ptr::null_mut();
    assert_eq!(
        unsafe { swc_corpus_from_jsonl(text.as_ptr(), &mut corpus) },
        SwcStatus::Ok
    );
    corpus
}

#[test]
fn fuzzy_round_trip_and_score() {
    let corpus = load();
    unsafe {
        assert_eq!(swc_corpus_mention_count(corpus), 4);
        let mut gold = ptr::null_mut();
        let mut resp = ptr::null_mut();
        assert_eq!(swc_gold_partition(corpus, &mut gold), SwcStatus::Ok);
        assert_eq!(swc_resolve_fuzzy(corpus, 0.83, &mut resp), SwcStatus::Ok);
        assert_eq!(swc_partition_len(resp), 4);

        let mut report = SwcScoreReport::default();
        assert_eq!(swc_score(gold, gold, &mut report), SwcStatus::Ok);
        assert_eq!(report.conll_f1, 1.0);
        assert_eq!(swc_score(gold, resp, &mut report), SwcStatus::Ok);
        assert!(report.conll_f1 > 0.0 && report.conll_f1 <= 1.0);

        let mut json = ptr::null_mut();
        assert_eq!(swc_partition_to_json(resp, &mut json), SwcStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(swc_partition_from_json(json, &mut back), SwcStatus::Ok);
        assert_eq!(swc_score(resp, back, &mut report), SwcStatus::Ok);
        assert_eq!(report.conll_f1, 1.0);
        swc_string_free(json);

        swc_partition_free(back);
        swc_partition_free(resp);
        swc_partition_free(gold);
        swc_corpus_free(corpus);
    }
}

#[test]
fn car_hashed() {
    let corpus = load();
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(swc_resolve_car_hashed(corpus, 0.6, 0.4, 10, 64, &mut p), SwcStatus::Ok);
        assert_eq!(swc_partition_len(p), 4);
        swc_partition_free(p);
        let mut q = ptr::null_mut();
        assert_eq!(
            swc_resolve_car_hashed(corpus, 0.6, 0.4, 10, 4, &mut q),
            SwcStatus::InvalidArgument
        );
        assert!(q.is_null());
        assert!(last_error().contains("dim"));
        assert_eq!(
            swc_resolve_car_hashed(corpus, 1.5, 0.4, 10, 64, &mut q),
            SwcStatus::InvalidArgument
        );
        swc_corpus_free(corpus);
    }
}

#[test]
fn similarity() {
    let a = CString::new("GraphPad Prism").unwrap();
    let b = CString::new("GraphPad Prism 8").unwrap();
    let mut s = 0.0;
    assert_eq!(
        unsafe { swc_ro_similarity(a.as_ptr(), b.as_ptr(), &mut s) },
        SwcStatus::Ok
    );
    assert!((s - 28.0 / 30.0).abs() < 1e-12);
}

#[test]
fn error_codes() {
    unsafe {
        let mut corpus = ptr::null_mut();
        assert_eq!(swc_corpus_from_jsonl(ptr::null(), &mut corpus), SwcStatus::NullPointer);
        assert!(last_error().contains("jsonl"));

        let bad = CString::new("{not json").unwrap();
        assert_eq!(swc_corpus_from_jsonl(bad.as_ptr(), &mut corpus), SwcStatus::Parse);

        let mismatch = CString::new(CORPUS.replace(r#""text":"MATLAB""#, r#""text":"Matlab""#)).unwrap();
        assert_eq!(
            swc_corpus_from_jsonl(mismatch.as_ptr(), &mut corpus),
            SwcStatus::InvalidCorpus
        );
        assert!(last_error().contains("span mismatch"));

        let missing = CString::new("/nonexistent/corpus.jsonl").unwrap();
        assert_eq!(swc_corpus_from_path(missing.as_ptr(), &mut corpus), SwcStatus::Io);
        assert!(corpus.is_null());

        let invalid_utf8 = [0xffu8, 0];
        let mut s = 0.0;
        assert_eq!(
            swc_ro_similarity(invalid_utf8.as_ptr().cast(), invalid_utf8.as_ptr().cast(), &mut s),
            SwcStatus::InvalidUtf8
        );

        let stripped = CORPUS
            .replace(r#","gold_cluster":"C1""#, "")
            .replace(r#","gold_cluster":"C2""#, "");
        let unlabeled = CString::new(stripped).unwrap();
        assert_eq!(swc_corpus_from_jsonl(unlabeled.as_ptr(), &mut corpus), SwcStatus::Ok);
        let mut gold = ptr::null_mut();
        assert_eq!(swc_gold_partition(corpus, &mut gold), SwcStatus::MissingGold);
        swc_corpus_free(corpus);

        // Success clears the previous message.
        let a = CString::new("a").unwrap();
        assert_eq!(swc_ro_similarity(a.as_ptr(), a.as_ptr(), &mut s), SwcStatus::Ok);
        assert!(swc_last_error_message().is_null());

        swc_corpus_free(ptr::null_mut());
        swc_partition_free(ptr::null_mut());
        swc_string_free(ptr::null_mut());
    }
}

#[test]
fn mismatched_mention_sets() {
    let a = CString::new(r#"{"clusters":{"x":["M1","M2"]}}"#).unwrap();
    let b = CString::new(r#"{"clusters":{"x":["M1"]}}"#).unwrap();
    unsafe {
        let (mut pa, mut pb) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(swc_partition_from_json(a.as_ptr(), &mut pa), SwcStatus::Ok);
        assert_eq!(swc_partition_from_json(b.as_ptr(), &mut pb), SwcStatus::Ok);
        let mut r = SwcScoreReport::default();
        assert_eq!(swc_score(pa, pb, &mut r), SwcStatus::MentionMismatch);
        swc_partition_free(pa);
        swc_partition_free(pb);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/swcoref.h")).unwrap();
    for symbol in [
        "swc_last_error_message",
        "swc_string_free",
        "swc_corpus_from_jsonl",
        "swc_corpus_from_path",
        "swc_corpus_free",
        "swc_corpus_mention_count",
        "swc_resolve_fuzzy",
        "swc_resolve_car_hashed",
        "swc_gold_partition",
        "swc_partition_free",
        "swc_partition_len",
        "swc_partition_to_json",
        "swc_partition_from_json",
        "swc_score",
        "swc_ro_similarity",
        "typedef struct SwcCorpus SwcCorpus",
        "SwcStatus_MentionMismatch = 8",
    ] {
        assert!(header.contains(symbol), "header lacks {symbol}");
    }
}
