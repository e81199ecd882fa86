use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use image::{Rgb, RgbImage, Rgba};
use synthgen::assets::{load_backgrounds, load_objects, save_assets};
use synthgen::dataset::{file_stem, IMAGES_DIR, LABELS_DIR};
use synthgen::demo::{demo_backgrounds, demo_library};
use synthgen::{generate_dataset, verify_dataset, AnnotationRecord, BackgroundSpec, GenerateConfig, Generator, ObjectLibrary};

fn smoke_assets() -> (ObjectLibrary, Vec<BackgroundSpec>) {
    (demo_library(2, 2, 7), demo_backgrounds(3, 4, 256, 192, 7))
}

fn smoke_config(workers: usize) -> GenerateConfig {
    GenerateConfig {
        count: 24,
        seed: 42,
        workers,
        ace: synthgen::AceParams {
            samples: 64,
            ..synthgen::AceParams::default()
        },
        ..GenerateConfig::default()
    }
}

fn read_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for sub in [IMAGES_DIR, LABELS_DIR] {
        let mut names: Vec<_> = fs::read_dir(root.join(sub)).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in names {
            let rel = format!("{sub}/{}", n.to_string_lossy());
            files.push((rel.clone(), fs::read(root.join(&rel)).unwrap()));
        }
    }
    files.push(("manifest.json".into(), fs::read(root.join("manifest.json")).unwrap()));
    files
}

#[test]
fn smoke_dataset_counts_and_balance() {
    let (lib, bgs) = smoke_assets();
    let dir = tempfile::tempdir().unwrap();
    let manifest = generate_dataset(&lib, &bgs, &smoke_config(2), dir.path()).unwrap();
    assert_eq!(manifest.images_requested, 24);
    assert_eq!(manifest.images_produced, 24);
    assert_eq!(manifest.objects_placed, 96);
    assert_eq!(manifest.anchors_skipped, 0);

    let mut histogram = [0usize; 2];
    for i in 0..24 {
        assert!(dir.path().join(IMAGES_DIR).join(format!("{}.png", file_stem(i))).is_file());
        let text = fs::read_to_string(dir.path().join(LABELS_DIR).join(format!("{}.txt", file_stem(i)))).unwrap();
        assert_eq!(text.lines().count(), 4, "image {i}");
        for line in text.lines() {
            let rec = AnnotationRecord::parse(line).unwrap();
            assert!(rec.is_in_bounds(), "{line}");
            histogram[rec.category] += 1;
        }
    }
    assert_eq!(histogram.to_vec(), manifest.category_histogram);
    for count in histogram {
        assert!((count as f64 - 48.0).abs() / 48.0 < 0.25, "histogram {histogram:?}");
    }

    let report = verify_dataset(dir.path()).unwrap();
    assert!(report.violations.is_empty(), "{:?}", report.violations);
    assert!(report.is_clean());
    assert_eq!(report.annotations, 96);
}

#[test]
fn output_bytes_do_not_depend_on_workers() {
    let (lib, bgs) = smoke_assets();
    let trees: Vec<_> = [1, 2, 8]
        .iter()
        .map(|&w| {
            let dir = tempfile::tempdir().unwrap();
            generate_dataset(&lib, &bgs, &smoke_config(w), dir.path()).unwrap();
            read_tree(dir.path())
        })
        .collect();
    assert_eq!(trees[0], trees[1]);
    assert_eq!(trees[0], trees[2]);

    let dir = tempfile::tempdir().unwrap();
    let other = GenerateConfig { seed: 43, ..smoke_config(1) };
    generate_dataset(&lib, &bgs, &other, dir.path()).unwrap();
    assert_ne!(read_tree(dir.path()), trees[0]);
}

/// 8-connected components of pixels whose red channel is at least `t`.
fn components(img: &RgbImage, t: u8) -> Vec<BTreeSet<(u32, u32)>> {
    let (w, h) = img.dimensions();
    let on = |x: u32, y: u32| img.get_pixel(x, y).0[0] >= t;
    let mut seen = vec![false; (w * h) as usize];
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if seen[(y * w + x) as usize] || !on(x, y) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![(x, y)];
            seen[(y * w + x) as usize] = true;
            while let Some((cx, cy)) = stack.pop() {
                comp.insert((cx, cy));
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (nx, ny) = (cx as i64 + dx, cy as i64 + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let (nx, ny) = (nx as u32, ny as u32);
                        if !seen[(ny * w + nx) as usize] && on(nx, ny) {
                            seen[(ny * w + nx) as usize] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            out.push(comp);
        }
    }
    out
}

#[test]
fn annotation_boxes_match_redetected_masks() {
    let (lib, bgs) = smoke_assets();
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(1);
    generate_dataset(&lib, &bgs, &config, dir.path()).unwrap();

    // White objects on black: every composite pixel equals its alpha.
    let mut white = lib.clone();
    for c in &mut white.cutouts {
        for p in c.image.pixels_mut() {
            *p = Rgba([255, 255, 255, p.0[3]]);
        }
    }
    let black: Vec<BackgroundSpec> = bgs
        .iter()
        .map(|b| BackgroundSpec {
            image: RgbImage::from_pixel(b.image.width(), b.image.height(), Rgb([0, 0, 0])),
            ..b.clone()
        })
        .collect();
    let oracle = Generator::new(&white, &black, GenerateConfig { equalize: false, ..config }).unwrap();

    for i in 0..24 {
        let rendered = oracle.render(i);
        let found = components(&rendered.image, synthgen::ALPHA_THRESHOLD);
        assert_eq!(found.len(), rendered.placements.len(), "image {i}");
        let mut redetected = Vec::new();
        for p in &rendered.placements {
            let mask: BTreeSet<(u32, u32)> = p
                .mask
                .enumerate_pixels()
                .filter(|(_, _, v)| v.0[0] == 255)
                .map(|(x, y, _)| (p.bbox.x + x, p.bbox.y + y))
                .collect();
            let comp = found.iter().find(|c| c.contains(mask.iter().next().unwrap())).unwrap();
            let inter = comp.intersection(&mask).count();
            let union = comp.union(&mask).count();
            assert_eq!(inter, union, "image {i}: IoU {}", inter as f64 / union as f64);

            let x0 = comp.iter().map(|c| c.0).min().unwrap();
            let x1 = comp.iter().map(|c| c.0).max().unwrap();
            let y0 = comp.iter().map(|c| c.1).min().unwrap();
            let y1 = comp.iter().map(|c| c.1).max().unwrap();
            let bbox = synthgen::PixelBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
            redetected.push(synthgen::serialize_annotation(&bbox, p.category, 256, 192).unwrap());
        }
        let written = fs::read_to_string(dir.path().join(LABELS_DIR).join(format!("{}.txt", file_stem(i)))).unwrap();
        assert_eq!(written, redetected.concat(), "image {i}");
    }
}

#[test]
fn verify_reports_injected_problems() {
    let (lib, bgs) = smoke_assets();
    let dir = tempfile::tempdir().unwrap();
    generate_dataset(&lib, &bgs, &smoke_config(1), dir.path()).unwrap();

    let label = dir.path().join(LABELS_DIR).join("000005.txt");
    let mut text = fs::read_to_string(&label).unwrap();
    text.push_str("1 1.200000 0.500000 0.100000 0.100000\n");
    fs::write(&label, text).unwrap();
    let report = verify_dataset(dir.path()).unwrap();
    assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
    assert_eq!(report.violations[0].file, "labels/000005.txt");
    assert_eq!(report.violations[0].line, Some(5));
    assert!(!report.digest_matches());

    fs::remove_file(dir.path().join(IMAGES_DIR).join("000009.png")).unwrap();
    let report = verify_dataset(dir.path()).unwrap();
    assert!(report
        .violations
        .iter()
        .any(|v| v.file == "labels/000009.txt" && v.message.contains("no image")));
}

#[test]
fn single_image_dataset() {
    let (lib, bgs) = smoke_assets();
    let dir = tempfile::tempdir().unwrap();
    let manifest = generate_dataset(&lib, &bgs, &GenerateConfig { count: 1, ..smoke_config(1) }, dir.path()).unwrap();
    assert_eq!(manifest.images_produced, 1);
    assert!(verify_dataset(dir.path()).unwrap().is_clean());
}

#[test]
fn refuses_non_empty_output() {
    let (lib, bgs) = smoke_assets();
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("stale.txt"), "x").unwrap();
    assert!(generate_dataset(&lib, &bgs, &smoke_config(1), dir.path()).is_err());
}

#[test]
fn assets_round_trip_through_disk() {
    let (lib, bgs) = smoke_assets();
    let dir = tempfile::tempdir().unwrap();
    let (objects, backgrounds, anchors) = (dir.path().join("objects"), dir.path().join("bg"), dir.path().join("anchors.json"));
    save_assets(&lib, &bgs, &objects, &backgrounds, &anchors).unwrap();
    assert_eq!(load_objects(&objects).unwrap(), lib);
    assert_eq!(load_backgrounds(&backgrounds, &anchors).unwrap(), bgs);
}
