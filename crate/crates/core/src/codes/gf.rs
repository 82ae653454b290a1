//! GF(2^m) arithmetic via exp/log tables, `3 ≤ m ≤ 7`.

/// Primitive polynomials, bit i = coefficient of x^i.
const PRIMITIVE: [(u32, u32); 5] = [(3, 0b1011), (4, 0b1_0011), (5, 0b10_0101), (6, 0b100_0011), (7, 0b1000_1001)];

#[derive(Debug, Clone)]
pub struct Field {
    m: u32,
    order: usize,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl Field {
    pub fn new(m: u32) -> Option<Self> {
        let poly = PRIMITIVE.iter().find(|(deg, _)| *deg == m)?.1;
        let order = (1usize << m) - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut x: u32 = 1;
        for (i, slot) in exp.iter_mut().enumerate().take(order) {
            *slot = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Some(Field { m, order, exp, log })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Multiplicative group order `2^m − 1`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn primitive_poly(&self) -> u32 {
        PRIMITIVE.iter().find(|(deg, _)| *deg == self.m).expect("constructed").1
    }

    /// `α^e` for any integer exponent.
    pub fn alpha_pow(&self, e: i64) -> u16 {
        self.exp[e.rem_euclid(self.order as i64) as usize]
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    pub fn inv(&self, a: u16) -> u16 {
        assert_ne!(a, 0, "zero has no inverse");
        self.exp[(self.order - self.log[a as usize] as usize) % self.order]
    }

    pub fn div(&self, a: u16, b: u16) -> u16 {
        self.mul(a, self.inv(b))
    }
}
