//! Command-surface tests: training, dataset generation, evaluation and
//! recognition through the public command functions and the argument
//! parser, including exit codes.

use std::fs;
use std::path::{Path, PathBuf};

use hybrid_ocr::cli::{cmd_evaluate, cmd_gen_dataset, cmd_recognize, cmd_train, run_from};
use hybrid_ocr::dataset::{read_manifest, DegradationSpec, MANIFEST_NAME};
use hybrid_ocr::pipeline::{PipelineConfig, PrototypeStore};
use hybrid_ocr::OcrError;

fn fixture_glyph_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/glyphs")
}

fn small_clean_spec() -> DegradationSpec {
    DegradationSpec {
        scale_percents: vec![100],
        skew_degrees: 0.0,
        salt_noise_fraction: 0.0,
        brightness_shift: 0,
        seed: 11,
        codes_per_scale: 4,
    }
}

#[test]
fn train_writes_80_prototypes_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let store_a = dir.path().join("a.store");
    let store_b = dir.path().join("b.store");
    assert_eq!(cmd_train(&fixture_glyph_dir(), &store_a, 0.3).unwrap(), 80);
    assert_eq!(cmd_train(&fixture_glyph_dir(), &store_b, 0.3).unwrap(), 80);
    assert_eq!(
        fs::read(&store_a).unwrap(),
        fs::read(&store_b).unwrap(),
        "rerun must be byte-identical"
    );
    let store = PrototypeStore::load(&store_a).unwrap();
    assert_eq!(store.len(), 80);
    assert_eq!(store.typesets().len(), 4);
}

#[test]
fn train_missing_file_names_the_key() {
    let src = fixture_glyph_dir();
    let dir = tempfile::tempdir().unwrap();
    let glyphs = dir.path().join("glyphs");
    fs::create_dir(&glyphs).unwrap();
    for entry in fs::read_dir(&src).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), glyphs.join(entry.file_name())).unwrap();
    }
    fs::remove_file(glyphs.join("bold_16_indian_3.pgm")).unwrap();

    let err = cmd_train(&glyphs, &dir.path().join("out.store"), 0.3).unwrap_err();
    match err {
        OcrError::IncompleteTrainingSet { missing } => {
            assert_eq!(missing, vec!["bold_16_indian_3".to_string()]);
        }
        other => panic!("unexpected error: {other:?}"),
    }
}

#[test]
fn gen_dataset_is_deterministic_under_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let spec = DegradationSpec {
        codes_per_scale: 3,
        ..DegradationSpec::default()
    };
    let summary_a = cmd_gen_dataset(&fixture_glyph_dir(), &out_a, &spec).unwrap();
    let summary_b = cmd_gen_dataset(&fixture_glyph_dir(), &out_b, &spec).unwrap();
    assert_eq!(summary_a, summary_b);
    assert_eq!(summary_a.images, 12);
    assert_eq!(summary_a.scales, 4);

    let mut files_a: Vec<PathBuf> = walk(&out_a);
    files_a.sort();
    let mut files_b: Vec<PathBuf> = walk(&out_b);
    files_b.sort();
    assert_eq!(files_a.len(), files_b.len());
    for (a, b) in files_a.iter().zip(files_b.iter()) {
        assert_eq!(a.strip_prefix(&out_a).unwrap(), b.strip_prefix(&out_b).unwrap());
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{a:?} differs");
    }
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

#[test]
fn evaluate_clean_dataset_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("ds");
    let store_path = dir.path().join("s.store");
    cmd_train(&fixture_glyph_dir(), &store_path, 0.3).unwrap();
    cmd_gen_dataset(&fixture_glyph_dir(), &dataset, &small_clean_spec()).unwrap();

    let report_path = dataset.join("report.tsv");
    let report = cmd_evaluate(&store_path, &dataset, &report_path, PipelineConfig::default())
        .unwrap();
    assert_eq!(report.rows.len(), 1);
    let row = &report.rows[0];
    assert_eq!(row.total_characters, 20);
    assert_eq!(row.hybrid.misclassified, 0);
    assert_eq!(row.hybrid.rejected, 0);
    assert_eq!(row.hybrid.recognized, 20);
    assert_eq!(row.hybrid.rate_excluding_rejects(), 100.0);
    assert_eq!(row.hybrid.rate_counting_rejects(), 100.0);

    let tsv = fs::read_to_string(&report_path).unwrap();
    assert!(tsv.contains("100%\t20\thybrid\t20\t0\t0\t100.00\t100.00"));
}

#[test]
fn evaluate_missing_manifest_is_error() {
    let dir = tempfile::tempdir().unwrap();
    let store_path = dir.path().join("s.store");
    cmd_train(&fixture_glyph_dir(), &store_path, 0.3).unwrap();
    let err = cmd_evaluate(
        &store_path,
        dir.path(),
        &dir.path().join("r.tsv"),
        PipelineConfig::default(),
    )
    .unwrap_err();
    assert!(matches!(err, OcrError::Io { .. }));
}

#[test]
fn recognize_clean_image_with_codebook() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("ds");
    let store_path = dir.path().join("s.store");
    cmd_train(&fixture_glyph_dir(), &store_path, 0.3).unwrap();
    cmd_gen_dataset(&fixture_glyph_dir(), &dataset, &small_clean_spec()).unwrap();
    let entry = &read_manifest(&dataset).unwrap()[0];
    let image_path = dataset.join(&entry.filename);

    let good = dir.path().join("good.codes");
    fs::write(&good, format!("99999\n{}\n", entry.digits)).unwrap();
    let outcome = cmd_recognize(
        &store_path,
        &image_path,
        None,
        Some(&good),
        PipelineConfig::default(),
    )
    .unwrap();
    assert!(outcome.succeeded());
    assert_eq!(outcome.codebook_valid, Some(true));
    let rendered = outcome.render();
    assert!(rendered.contains("codebook: valid"));
    assert!(rendered.contains("char 0: accepted"));

    let bad = dir.path().join("bad.codes");
    fs::write(&bad, "00000\n").unwrap();
    let outcome = cmd_recognize(
        &store_path,
        &image_path,
        None,
        Some(&bad),
        PipelineConfig::default(),
    )
    .unwrap();
    assert!(!outcome.succeeded());
    assert_eq!(outcome.codebook_valid, Some(false));
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let glyphs = fixture_glyph_dir();
    let store = dir.path().join("s.store");
    let dataset = dir.path().join("ds");

    // Usage errors: unknown subcommand / missing args.
    assert_eq!(run_from(["hybrid-ocr", "bogus"]), 2);
    assert_eq!(run_from(["hybrid-ocr", "train"]), 2);
    // Help is a success.
    assert_eq!(run_from(["hybrid-ocr", "--help"]), 0);

    // Full flow through the parser.
    assert_eq!(
        run_from([
            "hybrid-ocr",
            "train",
            glyphs.to_str().unwrap(),
            store.to_str().unwrap(),
        ]),
        0
    );
    assert_eq!(
        run_from([
            "hybrid-ocr",
            "gen-dataset",
            glyphs.to_str().unwrap(),
            dataset.to_str().unwrap(),
            "--seed",
            "11",
            "--scales",
            "100",
            "--skew",
            "0",
            "--salt",
            "0",
            "--brightness",
            "0",
            "--count",
            "3",
        ]),
        0
    );
    assert!(dataset.join(MANIFEST_NAME).exists());
    assert_eq!(
        run_from([
            "hybrid-ocr",
            "evaluate",
            store.to_str().unwrap(),
            dataset.to_str().unwrap(),
        ]),
        0
    );
    assert!(dataset.join("report.tsv").exists());

    let entry = &read_manifest(&dataset).unwrap()[0];
    let image = dataset.join(&entry.filename);
    assert_eq!(
        run_from([
            "hybrid-ocr",
            "recognize",
            store.to_str().unwrap(),
            image.to_str().unwrap(),
        ]),
        0
    );

    // Codebook mismatch means the recognition did not succeed: exit 1.
    let bad = dir.path().join("bad.codes");
    fs::write(&bad, "00000\n").unwrap();
    assert_eq!(
        run_from([
            "hybrid-ocr",
            "recognize",
            store.to_str().unwrap(),
            image.to_str().unwrap(),
            "--codebook",
            bad.to_str().unwrap(),
        ]),
        1
    );

    // I/O and format errors: exit 3.
    assert_eq!(
        run_from([
            "hybrid-ocr",
            "recognize",
            store.to_str().unwrap(),
            "/nonexistent.pgm",
        ]),
        3
    );
    assert_eq!(
        run_from([
            "hybrid-ocr",
            "train",
            "/nonexistent-dir",
            store.to_str().unwrap(),
        ]),
        3
    );
}

#[test]
fn recognize_region_flag_parses_through() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("ds");
    let store = dir.path().join("s.store");
    cmd_train(&fixture_glyph_dir(), &store, 0.3).unwrap();
    cmd_gen_dataset(&fixture_glyph_dir(), &dataset, &small_clean_spec()).unwrap();
    let entry = &read_manifest(&dataset).unwrap()[0];
    let image = dataset.join(&entry.filename);

    assert_eq!(
        run_from([
            "hybrid-ocr",
            "recognize",
            store.to_str().unwrap(),
            image.to_str().unwrap(),
            "--region",
            "0,0,10000,10000",
        ]),
        0
    );
    // Region entirely outside the image: format error path (exit 3).
    assert_eq!(
        run_from([
            "hybrid-ocr",
            "recognize",
            store.to_str().unwrap(),
            image.to_str().unwrap(),
            "--region",
            "9000,9000,10,10",
        ]),
        3
    );
}
