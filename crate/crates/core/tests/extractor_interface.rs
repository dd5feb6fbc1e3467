//! Files as the offline mask/embedding extractor writes them.

use std::path::Path;

use semsplat::io::{self, AnnotationManifest, EmbeddingMatrix, ManifestView, MANIFEST_VERSION};
use semsplat::{Camera, PipelineConfig, Raster};

const D: usize = 6;

fn camera(x: f64) -> Camera {
    Camera::look_at([x, 0.0, -3.0], [0.0; 3], [0.0, 1.0, 0.0], 20.0, 16, 12, 0.1, 50.0).unwrap()
}

fn unit(i: usize, eps: f32) -> Vec<f32> {
    let mut v = vec![eps; D];
    v[i] = 1.0;
    let n = v.iter().map(|x| x * x).sum::<f32>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn rect(x0: usize, x1: usize) -> Raster<bool> {
    Raster::from_vec(16, 12, 1, (0..16 * 12).map(|i| (x0..x1).contains(&(i % 16))).collect()).unwrap()
}

/// View 0 uses a label map; view 1 uses per-mask bitmaps with an
/// overlapping duplicate; view 2 found no masks.
fn write_fixture(dir: &Path) -> AnnotationManifest {
    let labels = Raster::from_vec(16, 12, 1, (0..16 * 12).map(|i| if i % 16 < 8 { 1 } else { 2 }).collect()).unwrap();
    io::write_label_map_png(dir.join("v0_labels.png"), &labels).unwrap();
    io::write_embeddings(dir.join("v0.emb"), &EmbeddingMatrix::from_rows(&[unit(0, 0.01), unit(1, 0.01)]).unwrap()).unwrap();

    io::write_mask_png(dir.join("v1_m1.png"), &rect(0, 8)).unwrap();
    io::write_mask_png(dir.join("v1_m2.png"), &rect(0, 9)).unwrap();
    io::write_mask_png(dir.join("v1_m3.png"), &rect(9, 16)).unwrap();
    io::write_label_map_png(dir.join("v1_labels.png"), &Raster::filled(16, 12, 1, 0)).unwrap();
    let v1 = [unit(0, 0.02), unit(5, 0.0), unit(1, 0.02)];
    io::write_embeddings(dir.join("v1.emb"), &EmbeddingMatrix::from_rows(&v1).unwrap()).unwrap();

    io::write_label_map_pgm(dir.join("v2_labels.pgm"), &Raster::filled(16, 12, 1, 0)).unwrap();
    io::write_embeddings(dir.join("v2.emb"), &EmbeddingMatrix::new(0, D, vec![]).unwrap()).unwrap();

    let view = |i: u32, labels: &str, emb: &str, scores: Vec<f32>, masks: Option<Vec<&str>>| ManifestView {
        view_index: i,
        image_width: 16,
        image_height: 12,
        label_map_path: labels.into(),
        embeddings_path: emb.into(),
        camera: camera(i as f64 * 0.2),
        mask_scores: scores,
        mask_paths: masks.map(|m| m.into_iter().map(Into::into).collect()),
    };
    let manifest = AnnotationManifest {
        version: MANIFEST_VERSION,
        embedding_dim: D,
        views: vec![
            view(0, "v0_labels.png", "v0.emb", vec![0.9, 0.8], None),
            view(1, "v1_labels.png", "v1.emb", vec![0.9, 0.5, 0.7], Some(vec!["v1_m1.png", "v1_m2.png", "v1_m3.png"])),
            view(2, "v2_labels.pgm", "v2.emb", vec![], None),
        ],
    };
    manifest.write(dir.join("manifest.json")).unwrap();
    manifest
}

#[test]
fn manifest_round_trips_and_loads_views() {
    let dir = tempfile::tempdir().unwrap();
    let written = write_fixture(dir.path());
    let manifest = AnnotationManifest::read(dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest, written);

    let views = manifest.load_views(dir.path()).unwrap();
    assert_eq!(views.iter().map(|v| v.masks().len()).collect::<Vec<_>>(), [2, 3, 0]);
    assert_eq!(views[0].label_map().get(3, 3, 0), 1);
    assert_eq!(views[0].label_map().get(12, 3, 0), 2);
    // mask 1 (8 columns) is smaller than mask 2 (9 columns) and wins the overlap
    assert_eq!(views[1].label_map().get(3, 3, 0), 1);
    assert_eq!(views[1].label_map().get(8, 3, 0), 2);
}

#[test]
fn nms_drops_the_duplicate_before_clustering() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let manifest = AnnotationManifest::read(dir.path().join("manifest.json")).unwrap();
    let views = manifest.load_views(dir.path()).unwrap();
    let (bank, maps) = PipelineConfig::default().build_bank(views).unwrap();
    // 4 surviving masks over 3 views: round(1.2 * 4 / 3) = 2
    assert_eq!(bank.len(), 2);
    for k in 0..bank.len() {
        assert!(bank.row(k)[5] < 0.5);
    }
    assert!(maps[2].values.data().iter().all(|&v| v == 0));
    assert_eq!(maps[0].values.get(0, 0, 0), maps[1].values.get(0, 0, 0));
    assert_eq!(maps[1].values.get(8, 0, 0), 0);
}

#[test]
fn canonical_phrase_file_is_three_unit_rows() {
    let dir = tempfile::tempdir().unwrap();
    let rows = vec![unit(0, 0.1), unit(1, 0.1), unit(2, 0.1)];
    io::write_embeddings(dir.path().join("canon.emb"), &EmbeddingMatrix::from_rows(&rows).unwrap()).unwrap();
    let m = io::read_embeddings(dir.path().join("canon.emb")).unwrap();
    assert_eq!((m.rows, m.cols), (3, D));
    let q = PipelineConfig::default().query_config(unit(3, 0.1), m.to_rows());
    q.validate().unwrap();
}

#[test]
fn manifest_validation_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = write_fixture(dir.path());

    manifest.version = 2;
    manifest.write(dir.path().join("v2.json")).unwrap();
    let err = AnnotationManifest::read(dir.path().join("v2.json")).unwrap_err().to_string();
    assert!(err.contains("version"), "{err}");

    manifest.version = MANIFEST_VERSION;
    manifest.embedding_dim = D + 1;
    let err = manifest.load_views(dir.path()).unwrap_err().to_string();
    assert!(err.contains("embedding_dim"), "{err}");

    manifest.embedding_dim = D;
    manifest.views[0].image_width = 20;
    manifest.views[0].camera.width = 20;
    let err = manifest.load_views(dir.path()).unwrap_err().to_string();
    assert!(err.contains("label map"), "{err}");

    manifest.views[0].image_width = 16;
    manifest.views[0].camera.width = 16;
    manifest.views[0].embeddings_path = "missing.emb".into();
    assert!(matches!(manifest.load_views(dir.path()), Err(semsplat::Error::Io { .. })));

    let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap().replace("\"embedding_dim\"", "\"dim\"");
    std::fs::write(dir.path().join("broken.json"), text).unwrap();
    assert!(AnnotationManifest::read(dir.path().join("broken.json")).is_err());
}
