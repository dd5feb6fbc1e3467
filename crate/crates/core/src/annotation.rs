//! Per-view mask sets: non-maximum suppression and label-map rasterization.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::model::Raster;

/// Default IoU above which the lower-priority mask is suppressed.
pub const DEFAULT_NMS_IOU: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct MaskAnnotation {
    pub mask_id: u32,
    width: usize,
    height: usize,
    bitmap: Vec<bool>,
    /// Extractor-reported quality (for example predicted IoU).
    pub score: f32,
    area: usize,
}

impl MaskAnnotation {
    pub fn new(mask_id: u32, width: usize, height: usize, bitmap: Vec<bool>, score: f32) -> Result<Self> {
        if mask_id == 0 {
            return Err(Error::invalid("mask id 0 is reserved for background"));
        }
        if bitmap.len() != width * height {
            return Err(Error::invalid(format!(
                "mask {mask_id}: bitmap has {} pixels, expected {width}x{height}",
                bitmap.len()
            )));
        }
        let area = bitmap.iter().filter(|&&b| b).count();
        if area == 0 {
            return Err(Error::invalid(format!("mask {mask_id} is empty")));
        }
        Ok(Self {
            mask_id,
            width,
            height,
            bitmap,
            score,
            area,
        })
    }

    /// Axis-aligned rectangle `[x0, x1) × [y0, y1)`.
    pub fn rect(mask_id: u32, width: usize, height: usize, x0: usize, y0: usize, x1: usize, y1: usize, score: f32) -> Result<Self> {
        let bitmap = (0..height)
            .flat_map(|y| (0..width).map(move |x| x >= x0 && x < x1 && y >= y0 && y < y1))
            .collect();
        Self::new(mask_id, width, height, bitmap, score)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn area(&self) -> usize {
        self.area
    }

    pub fn bitmap(&self) -> &[bool] {
        &self.bitmap
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.bitmap[y * self.width + x]
    }

    pub fn iou(&self, other: &MaskAnnotation) -> f64 {
        let inter = self
            .bitmap
            .iter()
            .zip(&other.bitmap)
            .filter(|(a, b)| **a && **b)
            .count();
        let union = self.area + other.area - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

fn priority(a: &MaskAnnotation, b: &MaskAnnotation) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.area.cmp(&a.area))
        .then(a.mask_id.cmp(&b.mask_id))
}

/// Greedy NMS in `(score desc, area desc, mask_id asc)` order. The result is
/// in that priority order.
pub fn nms_masks(masks: &[MaskAnnotation], iou_threshold: f64) -> Result<Vec<MaskAnnotation>> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::invalid(format!("NMS IoU threshold {iou_threshold} outside (0, 1]")));
    }
    let mut order: Vec<&MaskAnnotation> = masks.iter().collect();
    order.sort_by(|a, b| priority(a, b));
    let mut kept: Vec<MaskAnnotation> = Vec::new();
    for m in order {
        if kept.iter().all(|k| k.iou(m) <= iou_threshold) {
            kept.push(m.clone());
        }
    }
    Ok(kept)
}

/// Pixel → mask id (0 = background). Where masks overlap, the smaller mask
/// wins, then the lower id.
pub fn rasterize_label_map(view: &ViewAnnotation) -> Raster<u32> {
    label_map_from_masks(view.width, view.height, &view.masks)
}

fn label_map_from_masks(width: usize, height: usize, masks: &[MaskAnnotation]) -> Raster<u32> {
    let mut order: Vec<&MaskAnnotation> = masks.iter().collect();
    order.sort_by(|a, b| a.area.cmp(&b.area).then(a.mask_id.cmp(&b.mask_id)));
    let mut map = Raster::filled(width, height, 1, 0u32);
    for m in order {
        for (dst, &inside) in map.data_mut().iter_mut().zip(&m.bitmap) {
            if inside && *dst == 0 {
                *dst = m.mask_id;
            }
        }
    }
    map
}

/// Masks and per-mask embeddings of one input view.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewAnnotation {
    pub view_index: u32,
    width: usize,
    height: usize,
    masks: Vec<MaskAnnotation>,
    embeddings: Vec<Vec<f32>>,
    label_map: Raster<u32>,
}

impl ViewAnnotation {
    /// `embeddings[i]` belongs to `masks[i]`.
    pub fn new(
        view_index: u32,
        width: usize,
        height: usize,
        masks: Vec<MaskAnnotation>,
        embeddings: Vec<Vec<f32>>,
    ) -> Result<Self> {
        if masks.len() != embeddings.len() {
            return Err(Error::invalid(format!(
                "view {view_index}: {} masks but {} embeddings",
                masks.len(),
                embeddings.len()
            )));
        }
        if let Some(first) = embeddings.first() {
            if first.is_empty() || embeddings.iter().any(|e| e.len() != first.len()) {
                return Err(Error::invalid(format!("view {view_index}: embeddings differ in dimension")));
            }
        }
        let mut seen = HashSet::new();
        for m in &masks {
            if m.width != width || m.height != height {
                return Err(Error::invalid(format!(
                    "view {view_index}: mask {} is {}x{}, view is {width}x{height}",
                    m.mask_id, m.width, m.height
                )));
            }
            if !seen.insert(m.mask_id) {
                return Err(Error::invalid(format!("view {view_index}: duplicate mask id {}", m.mask_id)));
            }
        }
        let label_map = label_map_from_masks(width, height, &masks);
        Ok(Self {
            view_index,
            width,
            height,
            masks,
            embeddings,
            label_map,
        })
    }

    /// Splits a label map into one mask per distinct nonzero id. Ids map to
    /// embedding rows as `id - 1`; `scores` is indexed the same way (missing
    /// scores default to 0).
    pub fn from_label_map(
        view_index: u32,
        label_map: &Raster<u32>,
        embeddings: &[Vec<f32>],
        scores: &[f32],
    ) -> Result<Self> {
        let (w, h) = (label_map.width(), label_map.height());
        let mut bitmaps: BTreeMap<u32, Vec<bool>> = BTreeMap::new();
        for (i, &id) in label_map.data().iter().enumerate() {
            if id != 0 {
                bitmaps.entry(id).or_insert_with(|| vec![false; w * h])[i] = true;
            }
        }
        let mut masks = Vec::with_capacity(bitmaps.len());
        let mut embs = Vec::with_capacity(bitmaps.len());
        for (id, bitmap) in bitmaps {
            let row = embeddings.get(id as usize - 1).ok_or_else(|| {
                Error::invalid(format!(
                    "view {view_index}: label id {id} has no embedding row ({} rows)",
                    embeddings.len()
                ))
            })?;
            let score = scores.get(id as usize - 1).copied().unwrap_or(0.0);
            masks.push(MaskAnnotation::new(id, w, h, bitmap, score)?);
            embs.push(row.clone());
        }
        Self::new(view_index, w, h, masks, embs)
    }

    /// Drops masks (and their embeddings) suppressed by NMS and rebuilds the
    /// label map. Surviving masks keep their original order.
    pub fn suppress_overlaps(self, iou_threshold: f64) -> Result<Self> {
        let kept: HashSet<u32> = nms_masks(&self.masks, iou_threshold)?.iter().map(|m| m.mask_id).collect();
        let (masks, embeddings): (Vec<_>, Vec<_>) = self
            .masks
            .into_iter()
            .zip(self.embeddings)
            .filter(|(m, _)| kept.contains(&m.mask_id))
            .unzip();
        Self::new(self.view_index, self.width, self.height, masks, embeddings)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn masks(&self) -> &[MaskAnnotation] {
        &self.masks
    }

    pub fn embeddings(&self) -> &[Vec<f32>] {
        &self.embeddings
    }

    pub fn embedding_dim(&self) -> Option<usize> {
        self.embeddings.first().map(Vec::len)
    }

    pub fn label_map(&self) -> &Raster<u32> {
        &self.label_map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(id: u32, x0: usize, y0: usize, x1: usize, y1: usize, score: f32) -> MaskAnnotation {
        MaskAnnotation::rect(id, 200, 200, x0, y0, x1, y1, score).unwrap()
    }

    #[test]
    fn identical_masks_keep_higher_score() {
        let kept = nms_masks(&[rect(1, 0, 0, 10, 10, 0.2), rect(2, 0, 0, 10, 10, 0.9)], 0.5).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].mask_id, 2);
    }

    #[test]
    fn disjoint_masks_both_kept() {
        let kept = nms_masks(&[rect(1, 0, 0, 10, 10, 0.2), rect(2, 20, 20, 30, 30, 0.9)], 0.5).unwrap();
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn overlap_above_threshold_drops_lower_priority() {
        // A is 60x100, B is 100x100, A ⊂ B: IoU = 6000 / 10000
        let a = rect(1, 0, 0, 60, 100, 0.5);
        let b = rect(2, 0, 0, 100, 100, 0.5);
        assert_eq!(a.area(), 6000);
        assert_eq!(b.area(), 10000);
        assert!((a.iou(&b) - 0.6).abs() < 1e-12);
        let kept = nms_masks(&[a.clone(), b.clone()], 0.5).unwrap();
        // equal scores, larger area has priority
        assert_eq!(kept.iter().map(|m| m.mask_id).collect::<Vec<_>>(), vec![2]);
        let kept = nms_masks(&[a, b], 0.6).unwrap();
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn nms_edge_cases() {
        assert!(nms_masks(&[], 0.5).unwrap().is_empty());
        assert!(nms_masks(&[], 0.0).is_err());
        assert!(nms_masks(&[], 1.5).is_err());
    }

    #[test]
    fn nms_is_idempotent() {
        let masks: Vec<_> = (0..12)
            .map(|i| rect(i + 1, (i as usize * 7) % 50, (i as usize * 13) % 60, (i as usize * 7) % 50 + 40, (i as usize * 13) % 60 + 30, (i % 4) as f32 * 0.1))
            .collect();
        let once = nms_masks(&masks, 0.3).unwrap();
        let twice = nms_masks(&once, 0.3).unwrap();
        assert_eq!(once, twice);
        for (i, a) in once.iter().enumerate() {
            for b in &once[i + 1..] {
                assert!(a.iou(b) <= 0.3);
            }
        }
    }

    #[test]
    fn label_map_single_mask_and_empty() {
        let m = MaskAnnotation::rect(3, 8, 4, 0, 0, 4, 4, 0.0).unwrap();
        let view = ViewAnnotation::new(0, 8, 4, vec![m], vec![vec![1.0]]).unwrap();
        let map = rasterize_label_map(&view);
        for y in 0..4 {
            for x in 0..8 {
                assert_eq!(map.get(x, y, 0), if x < 4 { 3 } else { 0 });
            }
        }
        let empty = ViewAnnotation::new(0, 8, 4, vec![], vec![]).unwrap();
        assert!(rasterize_label_map(&empty).data().iter().all(|&v| v == 0));
    }

    #[test]
    fn smaller_mask_wins_overlap() {
        let big = rect(1, 0, 0, 100, 100, 0.9);
        let small = rect(2, 10, 10, 20, 20, 0.1);
        let view = ViewAnnotation::new(0, 200, 200, vec![big, small], vec![vec![1.0], vec![1.0]]).unwrap();
        let map = rasterize_label_map(&view);
        let count = |id| map.data().iter().filter(|&&v| v == id).count();
        assert_eq!(count(2), 100);
        assert_eq!(count(1), 9900);
        assert_eq!(count(0) + count(1) + count(2), 200 * 200);
    }

    #[test]
    fn equal_area_overlap_resolved_by_id() {
        let a = rect(5, 0, 0, 10, 10, 0.0);
        let b = rect(4, 5, 0, 15, 10, 0.0);
        let view = ViewAnnotation::new(0, 200, 200, vec![a, b], vec![vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(view.label_map().get(7, 5, 0), 4);
        assert_eq!(view.label_map().get(2, 5, 0), 5);
    }

    #[test]
    fn suppress_drops_matching_embeddings() {
        let a = rect(1, 0, 0, 10, 10, 0.2);
        let b = rect(2, 0, 0, 10, 10, 0.9);
        let c = rect(3, 50, 50, 60, 60, 0.1);
        let view = ViewAnnotation::new(0, 200, 200, vec![a, b, c], vec![vec![1.0], vec![2.0], vec![3.0]])
            .unwrap()
            .suppress_overlaps(0.5)
            .unwrap();
        assert_eq!(view.masks().iter().map(|m| m.mask_id).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(view.embeddings(), &[vec![2.0], vec![3.0]]);
        let ids: HashSet<u32> = view.label_map().data().iter().copied().filter(|&v| v != 0).collect();
        assert_eq!(ids, HashSet::from([2, 3]));
    }

    #[test]
    fn from_label_map_pairs_ids_with_rows() {
        let map = Raster::from_vec(3, 1, 1, vec![0u32, 2, 1]).unwrap();
        let view = ViewAnnotation::from_label_map(1, &map, &[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.3]).unwrap();
        assert_eq!(view.masks().len(), 2);
        assert_eq!(view.masks()[0].mask_id, 1);
        assert_eq!(view.masks()[0].score, 0.3);
        assert_eq!(view.masks()[1].score, 0.0);
        assert_eq!(view.embeddings()[1], vec![0.0, 1.0]);
        assert_eq!(view.label_map(), &map);
        let bad = Raster::from_vec(1, 1, 1, vec![3u32]).unwrap();
        assert!(ViewAnnotation::from_label_map(0, &bad, &[vec![1.0]], &[]).is_err());
    }

    #[test]
    fn rejects_inconsistent_views() {
        let m = rect(1, 0, 0, 5, 5, 0.0);
        assert!(ViewAnnotation::new(0, 200, 200, vec![m.clone()], vec![]).is_err());
        assert!(ViewAnnotation::new(0, 100, 200, vec![m.clone()], vec![vec![1.0]]).is_err());
        assert!(ViewAnnotation::new(0, 200, 200, vec![m.clone(), m], vec![vec![1.0], vec![1.0]]).is_err());
        assert!(MaskAnnotation::new(1, 2, 2, vec![false; 4], 0.0).is_err());
        assert!(MaskAnnotation::new(0, 2, 2, vec![true; 4], 0.0).is_err());
    }
}
