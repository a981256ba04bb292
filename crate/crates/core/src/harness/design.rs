use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Units;
use crate::channels::{memory_of, Channel};
use crate::error::Result;
use crate::matcore::{BandSpec, ComplexMatrix};
use crate::rates::{
    block_rate, full_rate, gmi_functional, gmi_logdet, mmse_rate, rate_report, RateReport,
    RateTerm,
};
use crate::shortening::{
    design_banded, design_blocks, mmse_matrix, BlockSpec, ReceiverDesign, Structure,
    INDEFINITE_THRESHOLD,
};

/// Row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRates {
    pub i_full: f64,
    pub i_mmse: f64,
    pub gmi_functional: f64,
    pub gmi_logdet: f64,
    pub block_rate: f64,
    pub terms: Vec<RateTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DesignRates {
    Banded(RateReport),
    Blocks(BlockRates),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDump {
    pub n_r: usize,
    pub n_t: usize,
    pub n0: f64,
    pub channel_memory: usize,
    pub structure: Structure,
    pub lambda_min: f64,
    pub units: Units,
    pub b: MatrixJson,
    pub g_r: MatrixJson,
    pub h_r: MatrixJson,
    pub rates: DesignRates,
    #[serde(skip)]
    matrices: Option<(ComplexMatrix, ComplexMatrix, ComplexMatrix)>,
}

/// Optimal receiver for one channel with every rate route, in nats.
pub fn design_dump(channel: &Channel, k: usize, blocks: Option<&BlockSpec>) -> Result<DesignDump> {
    let b = mmse_matrix(channel)?;
    let (design, rates): (ReceiverDesign, DesignRates) = match blocks {
        Some(spec) => {
            let design = design_blocks(channel, spec)?;
            let split = block_rate(channel, spec)?;
            let rates = BlockRates {
                i_full: full_rate(channel)?,
                i_mmse: mmse_rate(channel)?,
                gmi_functional: gmi_functional(&design.g_r, &b)?,
                gmi_logdet: gmi_logdet(&design.g_r)?,
                block_rate: split.total,
                terms: split.terms,
            };
            (design, DesignRates::Blocks(rates))
        }
        None => {
            let design = design_banded(channel, BandSpec::for_dimension(k, channel.n_t())?)?;
            (design, DesignRates::Banded(rate_report(channel, k)?))
        }
    };
    Ok(DesignDump {
        n_r: channel.n_r(),
        n_t: channel.n_t(),
        n0: channel.n0,
        channel_memory: memory_of(channel),
        structure: design.structure.clone(),
        lambda_min: design.lambda_min,
        units: Units::Nats,
        b: MatrixJson::from(&b),
        g_r: MatrixJson::from(&design.g_r),
        h_r: MatrixJson::from(&design.h_r),
        rates,
        matrices: Some((b, design.g_r, design.h_r)),
    })
}

impl DesignDump {
    pub fn g_r(&self) -> Option<&ComplexMatrix> {
        self.matrices.as_ref().map(|m| &m.1)
    }

    /// Rate fields rescaled from nats.
    pub fn in_units(&self, units: Units) -> DesignDump {
        let f = units.scale() / self.units.scale();
        let scale_terms = |terms: &[RateTerm]| -> Vec<RateTerm> {
            terms
                .iter()
                .map(|t| RateTerm {
                    label: t.label.clone(),
                    value: t.value * f,
                })
                .collect()
        };
        let rates = match &self.rates {
            DesignRates::Banded(r) => DesignRates::Banded(RateReport {
                k: r.k,
                i_full: r.i_full * f,
                i_mmse: r.i_mmse * f,
                gmi_functional: r.gmi_functional * f,
                gmi_logdet: r.gmi_logdet * f,
                gmi_column_removal: r.gmi_column_removal * f,
                gmi_chain: r.gmi_chain * f,
                column_removal_terms: scale_terms(&r.column_removal_terms),
                chain_terms: scale_terms(&r.chain_terms),
            }),
            DesignRates::Blocks(r) => DesignRates::Blocks(BlockRates {
                i_full: r.i_full * f,
                i_mmse: r.i_mmse * f,
                gmi_functional: r.gmi_functional * f,
                gmi_logdet: r.gmi_logdet * f,
                block_rate: r.block_rate * f,
                terms: scale_terms(&r.terms),
            }),
        };
        DesignDump {
            units,
            rates,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let structure = match &self.structure {
            Structure::Banded { k } => format!("banded, K={k}"),
            Structure::Blocks { sizes } => format!(
                "block diagonal, blocks {}",
                sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
            ),
            Structure::Classical { k } => format!("classical, K={k}"),
        };
        let _ = writeln!(
            out,
            "channel {}x{}  N0={}  memory L={}",
            self.n_r, self.n_t, self.n0, self.channel_memory
        );
        let _ = writeln!(out, "receiver: {structure}");
        let tag = if self.lambda_min < INDEFINITE_THRESHOLD {
            "indefinite"
        } else {
            "positive semidefinite"
        };
        let _ = writeln!(out, "lambda_min(G_r) = {:.6}  ({tag})", self.lambda_min);
        for (name, m) in [("B", &self.b), ("G_r", &self.g_r), ("H_r", &self.h_r)] {
            let _ = writeln!(out, "\n{name} =");
            out.push_str(&format_matrix(m));
        }
        let _ = writeln!(out, "\nrates ({}):", self.units);
        let mut line = |label: &str, v: f64| {
            let _ = writeln!(out, "  {label:<20} {v:.6}");
        };
        match &self.rates {
            DesignRates::Banded(r) => {
                line("full", r.i_full);
                line("mmse", r.i_mmse);
                line("gmi (functional)", r.gmi_functional);
                line("gmi (log det)", r.gmi_logdet);
                line("gmi (col. removal)", r.gmi_column_removal);
                line("gmi (chain rule)", r.gmi_chain);
                let _ = writeln!(out, "\nchain rule terms:");
                for t in &r.chain_terms {
                    let _ = writeln!(out, "  {:<20} {:.6}", t.label, t.value);
                }
            }
            DesignRates::Blocks(r) => {
                line("full", r.i_full);
                line("mmse", r.i_mmse);
                line("gmi (functional)", r.gmi_functional);
                line("gmi (log det)", r.gmi_logdet);
                line("block chain rule", r.block_rate);
                let _ = writeln!(out, "\nchain rule terms:");
                for t in &r.terms {
                    let _ = writeln!(out, "  {:<20} {:.6}", t.label, t.value);
                }
            }
        }
        out
    }
}

fn format_matrix(m: &MatrixJson) -> String {
    let real = m.0.iter().flatten().all(|z| z[1].abs() < 1e-12);
    let mut out = String::new();
    for row in &m.0 {
        let cells: Vec<String> = row
            .iter()
            .map(|z| {
                let re = if z[0].abs() < 5e-5 { 0.0 } else { z[0] };
                if real {
                    format!("{re:>9.4}")
                } else {
                    let sign = if z[1] < 0.0 { '-' } else { '+' };
                    format!("{re:>9.4}{sign}{:.4}i", z[1].abs())
                }
            })
            .collect();
        let _ = writeln!(out, " {}", cells.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{parse_channel, ChannelSource, SAMPLE_3X4};

    fn sample() -> Channel {
        parse_channel(SAMPLE_3X4, 1.0, ChannelSource::Explicit).unwrap()
    }

    #[test]
    fn banded_dump_contents() {
        let dump = design_dump(&sample(), 1, None).unwrap();
        assert!(dump.lambda_min < 0.0);
        assert_eq!(dump.channel_memory, 3);
        let text = dump.render_text();
        assert!(text.contains("   1.9286"));
        assert!(text.contains("indefinite"));
        let v: serde_json::Value = serde_json::from_str(&dump.to_json().unwrap()).unwrap();
        assert!((v["g_r"][1][1][0].as_f64().unwrap() - 1.9286).abs() < 1e-4);
        assert_eq!(v["rates"]["kind"], "banded");
    }

    #[test]
    fn block_rows_match_banded_edges() {
        let banded = design_dump(&sample(), 1, None).unwrap();
        let blocks = BlockSpec::new(vec![2, 2]).unwrap();
        let split = design_dump(&sample(), 1, Some(&blocks)).unwrap();
        for r in [0, 3] {
            for c in 0..4 {
                let a = banded.g_r.0[r][c][0];
                let b = split.g_r.0[r][c][0];
                assert!((a - b).abs() < 0.005, "row {r} col {c}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn memoryless_dump_is_diagonal() {
        let dump = design_dump(&sample(), 0, None).unwrap();
        let g = dump.g_r().unwrap();
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert_eq!(g[(r, c)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn unit_conversion() {
        let dump = design_dump(&sample(), 1, None).unwrap();
        let bits = dump.in_units(Units::Bits);
        let (DesignRates::Banded(a), DesignRates::Banded(b)) = (&dump.rates, &bits.rates) else {
            panic!()
        };
        assert!((b.i_full - a.i_full * std::f64::consts::LOG2_E).abs() < 1e-12);
        assert!(bits.render_text().contains("rates (bits)"));
    }
}
