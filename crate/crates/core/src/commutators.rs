//! `[b, T_α] f = b T_α f - T_α(b f)` and the bilinear commutator in one slot.

use rayon::prelude::*;

use crate::geometry::{distance, Cube, GridFunction, Point};
use crate::operators::{
    apply_i2, apply_t, inside_closed, BilinearFractionalSpec, BilinearOutput, KernelSpec,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum CommutatorKernel {
    Linear(KernelSpec),
    Bilinear(BilinearFractionalSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommutatorForm {
    /// `b(x) T f(x) - T(b f)(x)` from two operator applications.
    Decomposed,
    /// One sum with the factor `b(x) - b(y)` inside the kernel.
    CombinedKernel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorTask {
    pub b: GridFunction,
    pub kernel: CommutatorKernel,
    /// Which argument `b` acts on in the bilinear case (1 or 2).
    pub slot: usize,
    pub form: CommutatorForm,
    /// Exclusion radius; `None` means one source-cell diameter.
    pub exclusion: Option<f64>,
}

impl CommutatorTask {
    pub fn linear(b: GridFunction, kernel: KernelSpec) -> Self {
        CommutatorTask {
            b,
            kernel: CommutatorKernel::Linear(kernel),
            slot: 1,
            form: CommutatorForm::CombinedKernel,
            exclusion: None,
        }
    }

    pub fn bilinear(b: GridFunction, spec: BilinearFractionalSpec, slot: usize) -> Self {
        CommutatorTask {
            b,
            kernel: CommutatorKernel::Bilinear(spec),
            slot,
            form: CommutatorForm::CombinedKernel,
            exclusion: None,
        }
    }

    pub fn with_form(mut self, form: CommutatorForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_exclusion(mut self, exclusion: f64) -> Self {
        self.exclusion = Some(exclusion);
        self
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    fn b_at(&self, x: &Point) -> Result<f64> {
        self.b.value_at(x).ok_or_else(|| Error::EscapesGrid {
            required: self
                .b
                .domain()
                .hull_with(&Cube::new(self.dim(), *x, self.b.cell_width()).expect("valid cell"))
                .to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorOutput {
    pub values: Vec<f64>,
    /// Exclusion radius that was applied.
    pub exclusion: f64,
}

/// `[b, T_α] f` at each point.
pub fn commutator_apply(
    task: &CommutatorTask,
    f: &GridFunction,
    points: &[Point],
) -> Result<CommutatorOutput> {
    let k = match &task.kernel {
        CommutatorKernel::Linear(k) => k,
        CommutatorKernel::Bilinear(_) => {
            return Err(Error::InvalidParameter(
                "linear commutator called with a bilinear kernel".into(),
            ));
        }
    };
    let exclusion = task.exclusion.unwrap_or_else(|| f.cell_diameter());
    let bx: Vec<f64> = points.iter().map(|x| task.b_at(x)).collect::<Result<_>>()?;
    let by: Vec<f64> = (0..f.len())
        .map(|j| task.b_at(&f.cell_center(j)))
        .collect::<Result<_>>()?;
    let near: Vec<bool> = points
        .iter()
        .map(|x| inside_closed(f.domain(), x))
        .collect();
    let values = match task.form {
        CommutatorForm::Decomposed => {
            if k.alpha() <= 0.0 && near.iter().any(|&n| n) {
                return Err(Error::NearFieldDecomposed);
            }
            let bf = f.zip_with(
                &GridFunction::new(*f.domain(), f.resolution(), by)?,
                |a, c| a * c,
            )?;
            let tf = apply_t(k, f, points, exclusion)?;
            let tbf = apply_t(k, &bf, points, exclusion)?;
            bx.iter()
                .zip(tf.iter().zip(&tbf))
                .map(|(b, (t, tb))| b * t - tb)
                .collect()
        }
        CommutatorForm::CombinedKernel => {
            let diameter = f.cell_diameter();
            if k.alpha() <= 0.0 && near.iter().any(|&n| n) && exclusion < diameter * (1.0 - 1e-12) {
                return Err(Error::PvUnderResolved {
                    exclusion,
                    diameter,
                });
            }
            let cell = f.cell_measure();
            let cells: Vec<(Point, f64, f64)> = (0..f.len())
                .filter(|&j| f.samples()[j] != 0.0)
                .map(|j| (f.cell_center(j), f.samples()[j] * cell, by[j]))
                .collect();
            let radial = k.radial();
            let dim = k.dim();
            points
                .par_iter()
                .zip(bx.par_iter())
                .map(|(x, b0)| {
                    let mut acc = 0.0;
                    for (y, fy, b1) in &cells {
                        let v = [x[0] - y[0], x[1] - y[1]];
                        let r = distance(dim, &v, &[0.0; 2]);
                        if r > exclusion {
                            acc += (b0 - b1) * k.symbol().eval(&v) * radial.eval(r) * fy;
                        }
                    }
                    acc
                })
                .collect()
        }
    };
    Ok(CommutatorOutput { values, exclusion })
}

/// `[b, I_{α,2}]_i (f₁, f₂)` at each point. The factor `b(x) - b(y_i)` is split
/// as `b(x) I(f₁, f₂) - I(.., b f_i, ..)`; both sums drop the same diagonal
/// cell pairs, so this equals the combined double sum term by term.
pub fn bilinear_commutator_apply(
    task: &CommutatorTask,
    f1: &GridFunction,
    f2: &GridFunction,
    points: &[Point],
) -> Result<BilinearOutput> {
    let spec = match &task.kernel {
        CommutatorKernel::Bilinear(s) => s,
        CommutatorKernel::Linear(_) => {
            return Err(Error::InvalidParameter(
                "bilinear commutator called with a linear kernel".into(),
            ));
        }
    };
    if task.slot != 1 && task.slot != 2 {
        return Err(Error::InvalidSlot(task.slot));
    }
    let times_b = |f: &GridFunction| -> Result<GridFunction> {
        let bs: Vec<f64> = (0..f.len())
            .map(|j| task.b_at(&f.cell_center(j)))
            .collect::<Result<_>>()?;
        GridFunction::new(
            *f.domain(),
            f.resolution(),
            f.samples().iter().zip(bs).map(|(a, c)| a * c).collect(),
        )
    };
    let bx: Vec<f64> = points.iter().map(|x| task.b_at(x)).collect::<Result<_>>()?;
    let plain = apply_i2(spec, f1, f2, points)?;
    let with_b = if task.slot == 1 {
        apply_i2(spec, &times_b(f1)?, f2, points)?
    } else {
        apply_i2(spec, f1, &times_b(f2)?, points)?
    };
    Ok(BilinearOutput {
        values: bx
            .iter()
            .zip(plain.values.iter().zip(&with_b.values))
            .map(|(b, (p, w))| b * p - w)
            .collect(),
        excluded_pairs: plain.excluded_pairs,
    })
}
