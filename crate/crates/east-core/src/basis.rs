//! Bitstring basis for a chain of L spin-1/2 sites.
//!
//! Configurations are indexed by integers in `[0, 2^L)`. Bit `j - 1` of the
//! index encodes site `j` (sites are numbered 1..=L, site 1 is the lowest
//! bit). Bit value 1 means the site is occupied (`n = 1`), bit value 0 means
//! empty.

use crate::error::{EastError, Result};

/// Z product basis of an L-site chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinBasis {
    l: usize,
    dim: usize,
}

impl SpinBasis {
    /// Basis for `l` sites. Fails for `l < 1`; `l` is capped at 30 so the
    /// dimension always fits comfortably in a `usize` index space.
    pub fn new(l: usize) -> Result<Self> {
        if l < 1 {
            return Err(EastError::InvalidSiteCount(l as i64));
        }
        if l > 30 {
            return Err(EastError::InvalidSiteCount(l as i64));
        }
        Ok(Self { l, dim: 1usize << l })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Hilbert-space dimension `N = 2^L`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Occupation of `site` (1-based) in configuration `config`.
    #[inline]
    pub fn occupied(&self, config: usize, site: usize) -> bool {
        debug_assert!(site >= 1 && site <= self.l);
        (config >> (site - 1)) & 1 == 1
    }

    /// Bit mask selecting `site` (1-based).
    #[inline]
    pub fn site_mask(&self, site: usize) -> usize {
        debug_assert!(site >= 1 && site <= self.l);
        1usize << (site - 1)
    }

    /// Configuration with the spin at `site` flipped.
    #[inline]
    pub fn flip(&self, config: usize, site: usize) -> usize {
        config ^ self.site_mask(site)
    }

    /// Number of occupied sites in `config`.
    #[inline]
    pub fn occupation_count(&self, config: usize) -> u32 {
        (config as u64).count_ones()
    }

    /// Occupations of all sites, site 1 first.
    pub fn occupations(&self, config: usize) -> Vec<bool> {
        (1..=self.l).map(|j| self.occupied(config, j)).collect()
    }

    /// Index of the configuration with the given occupations (site 1 first).
    pub fn index_of(&self, occupations: &[bool]) -> usize {
        debug_assert_eq!(occupations.len(), self.l);
        occupations
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i))
    }
}
