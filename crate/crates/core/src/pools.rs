//! Pixel pool and screen pool.
//!
//! The pixel pool is a fixed budget of `capacity` dynamic pixels. Root
//! screens live outside that budget, so at every tick boundary
//! `free + Σ non-root pixels == capacity`.
//!
//! When the pool runs dry the engine evicts the globally lowest-intensity
//! non-root pixels (ties: lower screen seq, then pixel position, which is
//! device id then arrival order). Nothing in the underlying model says what
//! exhaustion should do; this policy is our own construction.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::intensity::Intensity;
use crate::model::{BlankPixel, MemoryPixel, MemoryScreen, SeqNo};
use crate::table::{ColorTable, ColorTableEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoolError {
    #[error("internal corruption: {0}")]
    Corruption(String),
    #[error("screen {0} is a root screen and cannot be modified")]
    RootImmutable(SeqNo),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelPool {
    capacity: usize,
    free: usize,
}

/// Result of asking the pixel pool for `k` pixels.
#[derive(Debug)]
pub enum Acquire {
    Granted(Vec<BlankPixel>),
    /// Nothing was handed out; this many more free pixels were needed.
    Shortfall(usize),
}

impl PixelPool {
    pub fn new(capacity: usize) -> Self {
        PixelPool { capacity, free: capacity }
    }

    pub(crate) fn with_free(capacity: usize, free: usize) -> Result<Self, PoolError> {
        if free > capacity {
            return Err(PoolError::Corruption(format!("free count {free} exceeds capacity {capacity}")));
        }
        Ok(PixelPool { capacity, free })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn free_count(&self) -> usize {
        self.free
    }

    pub fn outstanding(&self) -> usize {
        self.capacity - self.free
    }

    pub fn acquire(&mut self, k: usize) -> Acquire {
        if k > self.free {
            return Acquire::Shortfall(k - self.free);
        }
        self.free -= k;
        Acquire::Granted((0..k).map(|_| BlankPixel::new()).collect())
    }

    /// Returns pixels to the pool. Their fields are dropped, so nothing
    /// survives into the next use.
    pub fn release(&mut self, pixels: Vec<MemoryPixel>) -> Result<(), PoolError> {
        self.release_count(pixels.len())
    }

    pub(crate) fn release_count(&mut self, n: usize) -> Result<(), PoolError> {
        if n > self.outstanding() {
            return Err(PoolError::Corruption(format!(
                "released {n} pixels but only {} are outstanding",
                self.outstanding()
            )));
        }
        self.free += n;
        Ok(())
    }
}

/// What removing a screen freed up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreenRemoval {
    pub seq: SeqNo,
    pub released: usize,
    pub entries: Vec<ColorTableEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eviction {
    pub seq: SeqNo,
    pub pixel: MemoryPixel,
    /// Set on the eviction that emptied its screen.
    pub removed_screen: Option<ScreenRemoval>,
}

/// All live memory screens, root and runtime, keyed by sequence number.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScreenPool {
    screens: BTreeMap<SeqNo, MemoryScreen>,
}

impl ScreenPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.screens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.screens.is_empty()
    }

    pub fn get(&self, seq: SeqNo) -> Option<&MemoryScreen> {
        self.screens.get(&seq)
    }

    pub fn contains(&self, seq: SeqNo) -> bool {
        self.screens.contains_key(&seq)
    }

    /// Screens in ascending sequence order.
    pub fn iter(&self) -> impl Iterator<Item = &MemoryScreen> {
        self.screens.values()
    }

    pub fn roots(&self) -> impl Iterator<Item = &MemoryScreen> {
        self.screens.values().filter(|s| s.is_root)
    }

    /// Total pixels held by non-root screens.
    pub fn dynamic_pixel_count(&self) -> usize {
        self.screens.values().filter(|s| !s.is_root).map(|s| s.pixels.len()).sum()
    }

    pub fn commit(&mut self, screen: MemoryScreen) -> Result<(), PoolError> {
        if screen.pixels.is_empty() {
            return Err(PoolError::Corruption(format!("screen {} committed without pixels", screen.seq)));
        }
        if self.screens.contains_key(&screen.seq) {
            return Err(PoolError::Corruption(format!("screen {} committed twice", screen.seq)));
        }
        self.screens.insert(screen.seq, screen);
        Ok(())
    }

    /// Removes a runtime screen, releasing its pixels and purging its color
    /// table entries. Returns `Ok(None)` if no such screen exists.
    pub fn remove_screen(
        &mut self,
        pixel_pool: &mut PixelPool,
        table: &mut ColorTable,
        seq: SeqNo,
    ) -> Result<Option<ScreenRemoval>, PoolError> {
        match self.screens.get(&seq) {
            None => return Ok(None),
            Some(s) if s.is_root => return Err(PoolError::RootImmutable(seq)),
            Some(_) => {}
        }
        let screen = self.screens.remove(&seq).expect("checked above");
        let released = screen.pixels.len();
        pixel_pool.release(screen.pixels)?;
        let entries = table.remove_screen(seq);
        Ok(Some(ScreenRemoval { seq, released, entries }))
    }

    /// Evicts the weakest non-root pixels until `k` pixels are free or no
    /// evictable pixel remains. Returns evictions in the order performed.
    pub fn evict_for(
        &mut self,
        pixel_pool: &mut PixelPool,
        table: &mut ColorTable,
        k: usize,
    ) -> Result<Vec<Eviction>, PoolError> {
        let need = k.saturating_sub(pixel_pool.free_count());
        if need == 0 {
            return Ok(Vec::new());
        }

        // Removing one pixel never changes another pixel's key, so taking the
        // `need` smallest keys at once matches repeated minimum selection.
        let mut candidates: Vec<(Intensity, SeqNo, usize)> = self
            .screens
            .values()
            .filter(|s| !s.is_root)
            .flat_map(|s| s.pixels.iter().enumerate().map(move |(i, p)| (p.intensity, s.seq, i)))
            .collect();
        candidates.sort_unstable();
        candidates.truncate(need);

        let mut doomed: BTreeMap<SeqNo, BTreeSet<usize>> = BTreeMap::new();
        for &(_, seq, pos) in &candidates {
            doomed.entry(seq).or_default().insert(pos);
        }

        let mut taken: BTreeMap<(SeqNo, usize), MemoryPixel> = BTreeMap::new();
        let mut emptied = Vec::new();
        for (&seq, positions) in &doomed {
            let screen = self.screens.get_mut(&seq).expect("candidate screen exists");
            let pixels = std::mem::take(&mut screen.pixels);
            for (i, p) in pixels.into_iter().enumerate() {
                if positions.contains(&i) {
                    taken.insert((seq, i), p);
                } else {
                    screen.pixels.push(p);
                }
            }
            if screen.pixels.is_empty() {
                emptied.push(seq);
            }
        }
        pixel_pool.release_count(taken.len())?;

        let mut evictions: Vec<Eviction> = candidates
            .iter()
            .map(|&(_, seq, pos)| Eviction {
                seq,
                pixel: taken.remove(&(seq, pos)).expect("taken above"),
                removed_screen: None,
            })
            .collect();

        for seq in emptied {
            let removal = self.remove_screen(pixel_pool, table, seq)?.expect("emptied screen still present");
            let last = evictions.iter_mut().rev().find(|e| e.seq == seq).expect("emptied screen had an eviction");
            last.removed_screen = Some(removal);
        }
        Ok(evictions)
    }

    pub(crate) fn from_screens(screens: impl IntoIterator<Item = MemoryScreen>) -> Result<Self, PoolError> {
        let mut pool = ScreenPool::new();
        for s in screens {
            pool.commit(s)?;
        }
        Ok(pool)
    }

    pub(crate) fn get_dynamic_mut(&mut self, seq: SeqNo) -> Result<&mut MemoryScreen, PoolError> {
        match self.screens.get_mut(&seq) {
            None => Err(PoolError::Corruption(format!("screen {seq} not present"))),
            Some(s) if s.is_root => Err(PoolError::RootImmutable(seq)),
            Some(s) => Ok(s),
        }
    }

    pub(crate) fn dynamic_seqs(&self) -> Vec<SeqNo> {
        self.screens.values().filter(|s| !s.is_root).map(|s| s.seq).collect()
    }
}
