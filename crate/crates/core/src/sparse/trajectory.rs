use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::{CellIndex, GridSpec, WorldPoint};
use crate::rssi::{classify_k, sliding_filter, RssiThresholds};

/// One pose along the trajectory with its per-router readings.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Seconds.
    pub time: f64,
    pub pose: CellIndex,
    /// dBm per router; `None` when the router was not heard.
    pub rssi: Vec<Option<f64>>,
    /// Wall count per router, filled by classification.
    pub k: Vec<Option<u32>>,
}

impl Sample {
    pub fn new(time: f64, pose: CellIndex, rssi: Vec<Option<f64>>) -> Self {
        let k = vec![None; rssi.len()];
        Self { time, pose, rssi, k }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    samples: Vec<Sample>,
}

impl Trajectory {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if let Some(w) = samples.windows(2).find(|w| w[1].time < w[0].time) {
            return Err(Error::Domain(format!(
                "trajectory time goes backwards: {} then {}",
                w[0].time, w[1].time
            )));
        }
        if let Some(first) = samples.first() {
            let n = first.rssi.len();
            if samples.iter().any(|s| s.rssi.len() != n || s.k.len() != n) {
                return Err(Error::Domain(
                    "every sample must carry one reading slot per router".into(),
                ));
            }
        }
        Ok(Self { samples })
    }

    /// Poses at a fixed sampling period with no readings yet.
    pub fn from_poses(poses: &[CellIndex], period: f64, routers: usize) -> Self {
        let samples = poses
            .iter()
            .enumerate()
            .map(|(i, &p)| Sample::new(i as f64 * period, p, vec![None; routers]))
            .collect();
        Self { samples }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Sample] {
        &mut self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn router_count(&self) -> usize {
        self.samples.first().map_or(0, |s| s.rssi.len())
    }

    pub fn poses(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.samples.iter().map(|s| s.pose)
    }

    /// Readings heard from one router, in trajectory order.
    pub fn readings(&self, router: usize) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.rssi[router]).collect()
    }

    /// Median-filters each router's reading series. Missing readings stay
    /// missing and are skipped by the window.
    pub fn filtered(&self, window: usize) -> Result<Trajectory> {
        let mut out = self.clone();
        for r in 0..self.router_count() {
            let filtered = sliding_filter(&self.readings(r), window)?;
            let mut it = filtered.into_iter();
            for s in out.samples.iter_mut() {
                if s.rssi[r].is_some() {
                    s.rssi[r] = it.next();
                }
            }
        }
        Ok(out)
    }

    /// Fills `k` for every reading from the router's thresholds.
    pub fn classify(&mut self, thresholds: &[RssiThresholds]) -> Result<()> {
        if thresholds.len() != self.router_count() {
            return Err(Error::Config(format!(
                "{} threshold sets for {} routers",
                thresholds.len(),
                self.router_count()
            )));
        }
        for s in &mut self.samples {
            for (r, th) in thresholds.iter().enumerate() {
                s.k[r] = s.rssi[r].map(|v| classify_k(v, th));
            }
        }
        Ok(())
    }

    /// RSSI log: `t,x,y,rssi_0,...,rssi_{n-1}` with poses as cell centers in
    /// meters and empty fields for missing readings.
    pub fn write_csv<W: Write>(&self, spec: &GridSpec, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.router_count();
        let mut header = vec!["t".to_string(), "x".into(), "y".into()];
        header.extend((0..n).map(|i| format!("rssi_{i}")));
        w.write_record(&header)?;
        for s in &self.samples {
            let p = spec.cell_to_world(s.pose);
            let mut rec = vec![s.time.to_string(), p.x.to_string(), p.y.to_string()];
            rec.extend(s.rssi.iter().map(|v| v.map_or_else(String::new, |v| v.to_string())));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(spec: &GridSpec, input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let header = r.headers()?.clone();
        let fixed = ["t", "x", "y"];
        if header.len() < 3 || header.iter().take(3).ne(fixed.iter().copied()) {
            return Err(Error::Domain(format!(
                "RSSI log header must start with t,x,y; got {:?}",
                header.iter().collect::<Vec<_>>()
            )));
        }
        for (i, name) in header.iter().skip(3).enumerate() {
            if name != format!("rssi_{i}") {
                return Err(Error::Domain(format!(
                    "RSSI log column {} should be rssi_{i}, found {name:?}",
                    i + 3
                )));
            }
        }
        let mut samples = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let row = line + 2;
            let num = |i: usize| -> Result<f64> {
                record[i].parse::<f64>().map_err(|_| {
                    Error::Domain(format!("RSSI log row {row}: bad number {:?}", &record[i]))
                })
            };
            let pose = spec.world_to_cell(WorldPoint::new(num(1)?, num(2)?))?;
            let rssi = (3..record.len())
                .map(|i| {
                    if record[i].is_empty() {
                        Ok(None)
                    } else {
                        num(i).map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            samples.push(Sample::new(num(0)?, pose, rssi));
        }
        Self::new(samples)
    }
}
