//! Seminorm reports shared by the Lipschitz-Besov and heat-Besov methods.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Haar,
    Graph,
    Tent,
    Heat,
}

impl Method {
    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "direct" => Some(Method::Direct),
            "haar" => Some(Method::Haar),
            "graph" => Some(Method::Graph),
            "tent" => Some(Method::Tent),
            "heat" => Some(Method::Heat),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Haar => "haar",
            Method::Graph => "graph",
            Method::Tent => "tent",
            Method::Heat => "heat",
        }
    }
}

/// One term of the `ℓ^q` aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelTerm {
    /// Level `m`, or grid index for the heat method.
    pub index: usize,
    /// Time or scale attached to the term (`r^m`, or `t` on the heat grid).
    pub scale: f64,
    /// Scaled quantity entering the aggregation.
    pub value: f64,
    /// Quadrature weight (1 except on the heat grid with finite `q`).
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormReport {
    #[serde(serialize_with = "exponent")]
    pub p: f64,
    #[serde(serialize_with = "exponent")]
    pub q: f64,
    pub sigma: f64,
    pub method: Method,
    /// `‖f‖_p` part, zero for methods that fold it into the levels.
    pub lp_part: f64,
    pub seminorm: f64,
    pub value: f64,
    pub levels: Vec<LevelTerm>,
    pub warnings: Vec<String>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
}

/// Exponents in `[1, ∞]`; JSON has no infinity, so it becomes `"inf"`.
pub(crate) fn exponent<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

/// `(Σ w_j a_j^q)^{1/q}` or `max a_j` for `q = ∞`.
pub fn aggregate(terms: &[LevelTerm], q: f64) -> f64 {
    if q.is_infinite() {
        terms.iter().fold(0.0f64, |m, t| m.max(t.value))
    } else {
        terms.iter().map(|t| t.weight * t.value.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

impl SeminormReport {
    pub fn assemble(
        method: Method,
        p: f64,
        q: f64,
        sigma: f64,
        lp_part: f64,
        levels: Vec<LevelTerm>,
    ) -> Self {
        let seminorm = aggregate(&levels, q);
        SeminormReport {
            p,
            q,
            sigma,
            method,
            lp_part,
            seminorm,
            value: lp_part + seminorm,
            levels,
            warnings: Vec::new(),
            seed: None,
            depth: None,
        }
    }

    /// `|value - (lp_part + aggregate(levels))|`.
    pub fn recombination_error(&self) -> f64 {
        (self.value - self.lp_part - aggregate(&self.levels, self.q)).abs()
    }

    /// Ratio of consecutive level terms, last over second-to-last.
    pub fn tail_growth(&self) -> Option<f64> {
        let n = self.levels.len();
        (n >= 2 && self.levels[n - 2].value > 0.0).then(|| self.levels[n - 1].value / self.levels[n - 2].value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Parse `q`, accepting `inf`.
pub fn parse_exponent(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Some(f64::INFINITY),
        other => other.parse::<f64>().ok().filter(|x| *x >= 1.0),
    }
}
