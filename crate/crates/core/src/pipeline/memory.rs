use std::collections::HashMap;

use crate::error::{Error, Result};

/// Addressable range, in bytes.
pub const MEMORY_SIZE: u64 = 1 << 20;

const PAGE: u64 = 4096;

/// Sparse little-endian byte memory; untouched bytes read as zero.
#[derive(Debug, Clone, Default)]
pub struct Memory {
    pages: HashMap<u64, Box<[u8; PAGE as usize]>>,
}

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    fn check(addr: u64, size: usize) -> Result<()> {
        match addr.checked_add(size as u64) {
            Some(end) if end <= MEMORY_SIZE => Ok(()),
            _ => Err(Error::MemoryOutOfRange { addr, size }),
        }
    }

    fn byte(&self, addr: u64) -> u8 {
        self.pages.get(&(addr / PAGE)).map_or(0, |p| p[(addr % PAGE) as usize])
    }

    fn set_byte(&mut self, addr: u64, value: u8) {
        let page = self.pages.entry(addr / PAGE).or_insert_with(|| Box::new([0; PAGE as usize]));
        page[(addr % PAGE) as usize] = value;
    }

    /// Little-endian load of `size` bytes, zero-extended.
    pub fn load(&self, addr: u64, size: usize) -> Result<u64> {
        Self::check(addr, size)?;
        Ok((0..size).rev().fold(0u64, |v, i| v << 8 | self.byte(addr + i as u64) as u64))
    }

    pub fn store(&mut self, addr: u64, size: usize, value: u64) -> Result<()> {
        Self::check(addr, size)?;
        for i in 0..size {
            self.set_byte(addr + i as u64, (value >> (8 * i)) as u8);
        }
        Ok(())
    }

    pub fn write_bytes(&mut self, addr: u64, bytes: &[u8]) -> Result<()> {
        Self::check(addr, bytes.len())?;
        for (i, &b) in bytes.iter().enumerate() {
            self.set_byte(addr + i as u64, b);
        }
        Ok(())
    }

    pub fn read_bytes(&self, addr: u64, len: usize) -> Result<Vec<u8>> {
        Self::check(addr, len)?;
        Ok((0..len).map(|i| self.byte(addr + i as u64)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn little_endian_and_sparse() {
        let mut m = Memory::new();
        assert_eq!(m.load(0x500, 8).unwrap(), 0);
        m.store(0xffe, 4, 0xdead_beef).unwrap();
        assert_eq!(m.load(0xffe, 4).unwrap(), 0xdead_beef);
        assert_eq!(m.load(0xfff, 1).unwrap(), 0xbe);
        assert_eq!(m.read_bytes(0xffe, 2).unwrap(), vec![0xef, 0xbe]);
    }

    #[test]
    fn range_checked() {
        let mut m = Memory::new();
        assert!(m.load(MEMORY_SIZE - 8, 8).is_ok());
        assert_eq!(m.load(MEMORY_SIZE - 4, 8), Err(Error::MemoryOutOfRange { addr: MEMORY_SIZE - 4, size: 8 }));
        assert!(m.store(u64::MAX, 1, 0).is_err());
        assert!(m.write_bytes(MEMORY_SIZE, &[1]).is_err());
    }
}
