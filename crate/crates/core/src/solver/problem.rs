use crate::ann::{self, MlpModel};
use crate::error::{Error, Result};
use crate::hull::FacetSystem;
use crate::ocsvm::OneClassSvmModel;
use crate::relax::{
    input_nodes, mlp_expr, peaks_expr, svm_decision_expr, Expr, Input, Interval, LinearCut, NodeId,
};

/// Function to minimize, evaluated on the model input vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Surrogate {
    /// The analytic peaks function of a 2-D input.
    Peaks,
    /// First output of a trained network.
    Mlp(MlpModel),
    /// `|h2s(u) - 2 so2(u)|`.
    Balance { h2s: MlpModel, so2: MlpModel },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Validity {
    None,
    Facets(FacetSystem),
    Svm(OneClassSvmModel),
}

impl Validity {
    pub fn kind(&self) -> &'static str {
        match self {
            Validity::None => "none",
            Validity::Facets(_) => "hull",
            Validity::Svm(_) => "svm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    /// Bounds of the optimization variables.
    pub bounds: Vec<Interval>,
    /// Model input vector in terms of variables and fixed parameters.
    pub inputs: Vec<Input>,
    pub objective: Surrogate,
    pub validity: Validity,
    pub fixed_parameters: Vec<(String, f64)>,
}

impl Problem {
    /// Problem whose model inputs are the variables themselves.
    pub fn new(bounds: Vec<Interval>, objective: Surrogate, validity: Validity) -> Problem {
        Problem {
            inputs: (0..bounds.len()).map(Input::Var).collect(),
            bounds,
            objective,
            validity,
            fixed_parameters: Vec::new(),
        }
    }

    pub fn with_inputs(mut self, inputs: Vec<Input>) -> Problem {
        self.inputs = inputs;
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn check(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(Error::Config("problem has no variables".into()));
        }
        for (i, b) in self.bounds.iter().enumerate() {
            if !(b.lo <= b.hi) || !b.lo.is_finite() || !b.hi.is_finite() {
                return Err(Error::Config(format!(
                    "bound {i} is not a finite nonempty interval: {b}"
                )));
            }
        }
        for inp in &self.inputs {
            if let Input::Var(i) = *inp {
                if i >= self.dim() {
                    return Err(Error::Config(format!(
                        "input refers to variable {i} of {}",
                        self.dim()
                    )));
                }
            }
        }
        let n = self.inputs.len();
        let dims_ok = match &self.objective {
            Surrogate::Peaks => n == 2 && self.inputs.iter().all(|i| matches!(i, Input::Var(_))),
            Surrogate::Mlp(m) => m.n_inputs() == n,
            Surrogate::Balance { h2s, so2 } => h2s.n_inputs() == n && so2.n_inputs() == n,
        };
        if !dims_ok {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.model_input_dim(),
            });
        }
        let vdim = match &self.validity {
            Validity::None => n,
            Validity::Facets(f) => f.dim,
            Validity::Svm(m) => m.dim(),
        };
        if vdim != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: vdim,
            });
        }
        Ok(())
    }

    fn model_input_dim(&self) -> usize {
        match &self.objective {
            Surrogate::Peaks => 2,
            Surrogate::Mlp(m) => m.n_inputs(),
            Surrogate::Balance { h2s, .. } => h2s.n_inputs(),
        }
    }

    pub fn full_input(&self, x: &[f64]) -> Vec<f64> {
        self.inputs
            .iter()
            .map(|i| match *i {
                Input::Var(k) => x[k],
                Input::Fixed(v) => v,
            })
            .collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let u = self.full_input(x);
        match &self.objective {
            Surrogate::Peaks => ann::peaks(u[0], u[1]),
            Surrogate::Mlp(m) => m.forward(&u).expect("checked input size")[0],
            Surrogate::Balance { h2s, so2 } => {
                let a = h2s.forward(&u).expect("checked input size")[0];
                let b = so2.forward(&u).expect("checked input size")[0];
                (a - 2.0 * b).abs()
            }
        }
    }

    /// Validity margin: nonnegative inside the domain; `+inf` without a
    /// constraint. For facets this is the negated hull margin.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let u = self.full_input(x);
        match &self.validity {
            Validity::None => f64::INFINITY,
            Validity::Facets(f) => -(0..f.n_facets())
                .map(|i| f.row_value(i, &u))
                .fold(f64::NEG_INFINITY, f64::max),
            Validity::Svm(m) => m.decision(&u).expect("checked input size"),
        }
    }

    pub fn append_objective(&self, e: &mut Expr) -> Result<NodeId> {
        Ok(match &self.objective {
            Surrogate::Peaks => match (self.inputs[0], self.inputs[1]) {
                (Input::Var(a), Input::Var(b)) => peaks_expr(e, a, b),
                _ => return Err(Error::Expression("peaks with fixed inputs".into())),
            },
            Surrogate::Mlp(m) => {
                let ins = input_nodes(e, &self.inputs);
                mlp_expr(e, m, &ins)[0]
            }
            Surrogate::Balance { h2s, so2 } => {
                let ins = input_nodes(e, &self.inputs);
                let a = mlp_expr(e, h2s, &ins)[0];
                let b = mlp_expr(e, so2, &ins)[0];
                let d = e.affine(&[(a, 1.0), (b, -2.0)], 0.0);
                e.abs(d)
            }
        })
    }

    /// Objective tape whose last node is the objective.
    pub fn objective_expr(&self) -> Result<Expr> {
        let mut e = Expr::new(self.dim());
        let root = self.append_objective(&mut e)?;
        if root != e.output() {
            e.affine(&[(root, 1.0)], 0.0);
        }
        e.validate()?;
        Ok(e)
    }

    /// SVM decision tape, if the validity model is an SVM.
    pub fn svm_expr(&self, expanded: bool) -> Option<Expr> {
        match &self.validity {
            Validity::Svm(m) => {
                let mut e = Expr::new(self.dim());
                svm_decision_expr(&mut e, m, &self.inputs, expanded);
                Some(e)
            }
            _ => None,
        }
    }

    /// Facet rows as cuts `a.u + b - tol <= 0` over the variables.
    pub fn facet_cuts(&self, tol: f64) -> Vec<LinearCut> {
        let Validity::Facets(f) = &self.validity else {
            return Vec::new();
        };
        (0..f.n_facets())
            .map(|r| {
                let mut coef = vec![0.0; self.dim()];
                let mut constant = f.b[r] - tol;
                for (a, inp) in f.a[r].iter().zip(&self.inputs) {
                    match *inp {
                        Input::Var(i) => coef[i] += a,
                        Input::Fixed(v) => constant += a * v,
                    }
                }
                LinearCut { coef, constant }
            })
            .collect()
    }

    /// Variable count of the full-space formulation: degrees of freedom,
    /// a distance and a kernel value per support vector, one per neuron,
    /// and the objective epigraph variable.
    pub fn full_space_variables(&self) -> usize {
        let sv = match &self.validity {
            Validity::Svm(m) => m.n_support(),
            _ => 0,
        };
        let neurons = match &self.objective {
            Surrogate::Peaks => 0,
            Surrogate::Mlp(m) => m.n_neurons(),
            Surrogate::Balance { h2s, so2 } => h2s.n_neurons() + so2.n_neurons(),
        };
        self.dim() + 2 * sv + neurons + 1
    }
}
