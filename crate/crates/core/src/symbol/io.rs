//! Symbol file format (JSON).

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{Backend, Builtin, GridSymbol, Symbol};
use crate::error::{Error, Result};
use crate::lattice::{LatticeWindow, TorusGrid};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Expr,
    Builtin,
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridData {
    pub window: LatticeWindow,
    pub grid: TorusGrid,
    /// Row-major `[re, im]` samples: window point, then grid node.
    pub values: Vec<[f64; 2]>,
    /// Per-row lower corner of the frequency box; centred box when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_offsets: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior_margin: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    pub kind: SymbolKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridData>,
}

impl SymbolFile {
    pub fn from_symbol<T: Real>(sigma: &Symbol<T>) -> Self {
        let mut file = SymbolFile {
            n: sigma.dim(),
            order: sigma.declared_order(),
            kind: SymbolKind::Expr,
            expr: None,
            builtin: None,
            grid: None,
        };
        match sigma.backend() {
            Backend::Expr(e) => file.expr = Some(e.to_string()),
            Backend::Builtin(b) => {
                file.kind = SymbolKind::Builtin;
                file.builtin = Some(b.clone());
            }
            Backend::Grid(g) => {
                file.kind = SymbolKind::Grid;
                let n = g.window().dim();
                file.grid = Some(GridData {
                    window: g.window().clone(),
                    grid: g.grid().clone(),
                    values: g
                        .values()
                        .iter()
                        .map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()])
                        .collect(),
                    freq_offsets: Some(g.freq_lo().chunks(n).map(<[i64]>::to_vec).collect()),
                    freq_width: Some(g.freq_width()),
                    interior_margin: Some(g.interior_margin()),
                });
            }
        }
        file
    }

    pub fn into_symbol<T: Real>(self) -> Result<Symbol<T>> {
        if self.n == 0 {
            return Err(Error::Format("symbol dimension must be positive".into()));
        }
        let missing = |field: &str| Error::Format(format!("kind requires the {field:?} field"));
        let symbol = match self.kind {
            SymbolKind::Expr => Symbol::parse(self.expr.as_deref().ok_or_else(|| missing("expr"))?, self.n)?,
            SymbolKind::Builtin => {
                let b = self.builtin.ok_or_else(|| missing("builtin"))?;
                Symbol::builtin(b, self.n).map_err(|e| Error::Format(e.to_string()))?
            }
            SymbolKind::Grid => {
                let data = self.grid.ok_or_else(|| missing("grid"))?;
                let window = LatticeWindow::new(data.window.dim(), data.window.half_width())
                    .map_err(|e| Error::Format(e.to_string()))?;
                let grid = TorusGrid::new(data.grid.dim(), data.grid.points_per_axis())
                    .map_err(|e| Error::Format(e.to_string()))?;
                if window.dim() != self.n || grid.dim() != self.n {
                    return Err(Error::Format("grid symbol dimensions disagree with n".into()));
                }
                let values: Vec<Complex<T>> = data
                    .values
                    .iter()
                    .map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im)))
                    .collect();
                let g = match data.freq_offsets {
                    Some(offsets) => {
                        if offsets.iter().any(|o| o.len() != self.n) {
                            return Err(Error::Format("frequency offsets must have n entries".into()));
                        }
                        let width = data.freq_width.unwrap_or(grid.points_per_axis());
                        GridSymbol::with_band(window, grid, values, offsets.concat(), width)
                    }
                    None => GridSymbol::new(window, grid, values),
                }
                .map_err(|e| Error::Format(e.to_string()))?;
                let g = match data.interior_margin {
                    Some(m) => g.with_interior_margin(m),
                    None => g,
                };
                Symbol::from_grid(g)
            }
        };
        let order = self.order.or(symbol.declared_order());
        Ok(symbol.with_optional_order(order))
    }
}

impl<T: Real> Symbol<T> {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: SymbolFile = serde_json::from_str(text)?;
        file.into_symbol()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SymbolFile::from_symbol(self))?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}
