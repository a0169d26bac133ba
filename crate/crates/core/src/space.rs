//! A space on which Ext tables are computed: an irrelevant-locus complex
//! together with the degree selector defining its morphisms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fan::SimplicialComplex;
use crate::selector::WeightSelector;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Space {
    pub name: String,
    pub complex: SimplicialComplex,
    pub selector: WeightSelector,
}

impl Space {
    pub fn new(name: impl Into<String>, complex: SimplicialComplex, selector: WeightSelector) -> Result<Self> {
        if selector.n != complex.ground_size() {
            return Err(Error::Dimension(format!(
                "selector on {} coordinates for a complex on {}",
                selector.n,
                complex.ground_size()
            )));
        }
        Ok(Space { name: name.into(), complex, selector })
    }

    /// The torus-equivariant category of `[U_Σ / G]`.
    pub fn equivariant(name: impl Into<String>, complex: SimplicialComplex) -> Self {
        let n = complex.ground_size();
        Space { name: name.into(), complex, selector: WeightSelector::equivariant(n) }
    }

    pub fn n(&self) -> usize {
        self.complex.ground_size()
    }
}
