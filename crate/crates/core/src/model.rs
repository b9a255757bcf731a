use crate::error::Result;
use crate::harmonic::HarmonicStructure;
use crate::laplacian::GraphOperator;
use crate::pcf::{Budget, Dimensions, FractalDescriptor, VertexHierarchy, VertexTable};

/// A descriptor with its harmonic structure and vertex tables up to a level.
#[derive(Debug, Clone)]
pub struct Fractal {
    structure: HarmonicStructure,
    hierarchy: VertexHierarchy,
}

impl Fractal {
    pub fn new(desc: &FractalDescriptor, max_level: usize) -> Result<Self> {
        Self::with_budget(desc, max_level, Budget::default())
    }

    pub fn with_budget(desc: &FractalDescriptor, max_level: usize, budget: Budget) -> Result<Self> {
        let structure = HarmonicStructure::derive(desc)?;
        let hierarchy = VertexHierarchy::build_with_budget(desc, max_level, budget)?;
        Ok(Fractal { structure, hierarchy })
    }

    pub fn descriptor(&self) -> &FractalDescriptor {
        self.structure.descriptor()
    }

    pub fn structure(&self) -> &HarmonicStructure {
        &self.structure
    }

    pub fn hierarchy(&self) -> &VertexHierarchy {
        &self.hierarchy
    }

    pub fn dims(&self) -> Dimensions {
        self.structure.dims()
    }

    pub fn max_level(&self) -> usize {
        self.hierarchy.max_level()
    }

    pub fn table(&self, m: usize) -> &VertexTable {
        self.hierarchy.level(m)
    }

    pub fn laplacian(&self, m: usize) -> GraphOperator {
        GraphOperator::assemble(self.descriptor(), self.table(m))
    }

    /// Base scale `r`.
    pub fn r(&self) -> f64 {
        self.descriptor().base_scale()
    }
}
