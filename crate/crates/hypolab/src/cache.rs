//! Shared cache of elliptic profiles, keyed by `λ`, grid and coefficients.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use hypolab_core::elliptic::ProfileSolution;
use hypolab_core::synthesis::{EllipticProfiles, ProfileProvider};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    digest: String,
    n: usize,
    dim: usize,
    r: u64,
    c: u64,
    lambda: u64,
}

/// Safe for concurrent lookup and insert. Two threads missing on the same
/// key may both solve; the results are identical and the first insert wins.
#[derive(Debug, Default)]
pub struct ProfileCache {
    map: RwLock<HashMap<Key, Arc<ProfileSolution>>>,
}

impl ProfileCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("profile cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A provider that solves through this cache.
    pub fn provider<'a>(&'a self, inner: &'a EllipticProfiles) -> CachedProfiles<'a> {
        let c = &inner.coeffs;
        let digest = [&c.a11, &c.a22, &c.a1, &c.a2, &c.a0, &inner.g]
            .iter()
            .map(|f| f.canonical())
            .collect::<Vec<_>>()
            .join(";");
        CachedProfiles { cache: self, inner, digest }
    }
}

pub struct CachedProfiles<'a> {
    cache: &'a ProfileCache,
    inner: &'a EllipticProfiles,
    digest: String,
}

impl CachedProfiles<'_> {
    fn key(&self, lambda: f64) -> Key {
        Key {
            digest: self.digest.clone(),
            n: self.inner.n,
            dim: self.inner.dim,
            r: self.inner.r.to_bits(),
            c: self.inner.c.to_bits(),
            lambda: lambda.to_bits(),
        }
    }

    /// Solves every missing `λ` on the rayon pool.
    pub fn prefetch(&self, lambdas: &[f64]) -> hypolab_core::Result<()> {
        lambdas.par_iter().try_for_each(|&l| self.profile(l).map(|_| ()))
    }
}

impl ProfileProvider for CachedProfiles<'_> {
    fn profile(&self, lambda: f64) -> hypolab_core::Result<Arc<ProfileSolution>> {
        let key = self.key(lambda);
        if let Some(p) = self.cache.map.read().expect("profile cache poisoned").get(&key) {
            return Ok(Arc::clone(p));
        }
        let solved = self.inner.profile(lambda)?;
        let mut map = self.cache.map.write().expect("profile cache poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(solved)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hypolab_core::coeff::FieldFn;
    use hypolab_core::elliptic::{BarrierParams, EllipticCoeffs};

    #[test]
    fn concurrent_fill_is_consistent() {
        let co = EllipticCoeffs::laplacian();
        let g = FieldFn::constant(1.0);
        let bp = BarrierParams::from_inputs(co.sampled_inputs(&g, 1.0, 1, &[], 11), 1.0).unwrap();
        let inner = EllipticProfiles::for_eps(co, g, &bp, 0.5, 15, 1);
        let cache = ProfileCache::new();
        let prov = cache.provider(&inner);
        let lambdas: Vec<f64> = (0..40).map(|i| 1.0 + (i % 10) as f64).collect();
        prov.prefetch(&lambdas).unwrap();
        assert_eq!(cache.len(), 10);
        let a = prov.profile(3.0).unwrap();
        let b = inner.profile(3.0).unwrap();
        assert_eq!(a.u, b.u);
    }
}
