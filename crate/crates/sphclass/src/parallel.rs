use rayon::prelude::*;
use sphclass_core::net::Classifier;
use sphclass_core::{PointCloud, Result};

/// Spreads prediction over the current rayon pool. Each cloud is classified
/// independently, so results match the wrapped classifier exactly.
pub struct ParallelClassifier<'a, C: ?Sized>(pub &'a C);

const CHUNK: usize = 16;

impl<C: Classifier + Sync + ?Sized> Classifier for ParallelClassifier<'_, C> {
    fn num_classes(&self) -> usize {
        self.0.num_classes()
    }

    fn predict(&self, clouds: &[PointCloud]) -> Result<Vec<usize>> {
        if rayon::current_num_threads() <= 1 || clouds.len() <= CHUNK {
            return self.0.predict(clouds);
        }
        let parts = clouds.par_chunks(CHUNK).map(|c| self.0.predict(c)).collect::<Result<Vec<_>>>()?;
        Ok(parts.concat())
    }

    fn fingerprint(&self) -> String {
        self.0.fingerprint()
    }
}
