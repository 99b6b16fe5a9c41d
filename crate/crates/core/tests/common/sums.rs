//! Integrands over N^1 and N^2 given as sums of `c * y^a * q^(-b.y)` on a
//! subset of the orthant, with exact partial sums and tail bounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub struct Mono {
    pub c: i64,
    pub a: Vec<u32>,
    /// Decay rates, all at least 1.
    pub b: Vec<u32>,
}

pub struct SumFixture {
    pub name: &'static str,
    pub vars: Vec<&'static str>,
    pub domain: &'static str,
    pub inside: fn(&[i64]) -> bool,
    pub monos: Vec<Mono>,
}

fn m(c: i64, a: &[u32], b: &[u32]) -> Mono {
    Mono { c, a: a.to_vec(), b: b.to_vec() }
}

impl SumFixture {
    pub fn pcf(&self) -> String {
        let mut s = format!("func {}(; {}) {{\n", self.name, self.vars.join(", "));
        for mono in &self.monos {
            let exp: Vec<String> = self.vars.iter().zip(&mono.b).map(|(v, b)| format!("-{b}*{v}")).collect();
            let mut factors = Vec::new();
            for (v, a) in self.vars.iter().zip(&mono.a) {
                for _ in 0..*a {
                    factors.push(v.to_string());
                }
            }
            s.push_str(&format!(
                "  term coeff = {}, exp = {}, factors = [{}];\n",
                mono.c,
                exp.join(" "),
                factors.join(", ")
            ));
        }
        s.push_str(&format!("  domain {};\n}}\n", self.domain));
        s
    }

    /// Exact sum over `[0, n)^m` intersected with the domain, at `q = num/den`.
    pub fn partial_sum(&self, num: i64, den: i64, n: i64) -> BigRational {
        let dim = self.vars.len();
        let top = self.monos.iter().map(|mo| mo.b.iter().sum::<u32>()).max().unwrap() as usize * (n as usize - 1);
        let pows = |base: i64| {
            let mut v = vec![BigInt::one()];
            for i in 1..=top {
                let next = &v[i - 1] * BigInt::from(base);
                v.push(next);
            }
            v
        };
        let (np, dp) = (pows(num), pows(den));
        let mut acc = BigInt::zero();
        let mut y = vec![0i64; dim];
        loop {
            if (self.inside)(&y) {
                for mono in &self.monos {
                    let e: usize = mono.b.iter().zip(&y).map(|(b, y)| *b as usize * *y as usize).sum();
                    let mut t = BigInt::from(mono.c);
                    for (a, yi) in mono.a.iter().zip(&y) {
                        t *= BigInt::from(*yi).pow(*a);
                    }
                    acc += t * &dp[e] * &np[top - e];
                }
            }
            let mut i = 0;
            loop {
                if i == dim {
                    return BigRational::new(acc, np[top].clone());
                }
                y[i] += 1;
                if y[i] < n {
                    break;
                }
                y[i] = 0;
                i += 1;
            }
        }
    }

    /// An exact upper bound on the sum of `|f|` outside `[0, n)^m`.
    pub fn tail_bound(&self, num: i64, den: i64, n: i64) -> BigRational {
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        let mut total = BigRational::zero();
        for mono in &self.monos {
            let parts: Vec<(BigRational, BigRational)> =
                mono.a.iter().zip(&mono.b).map(|(a, b)| one_dim(*a, *b, &q, n)).collect();
            // outside the box at least one coordinate is >= n
            let mut bound = BigRational::zero();
            for i in 0..parts.len() {
                let mut prod = parts[i].1.clone();
                for (j, p) in parts.iter().enumerate() {
                    if j != i {
                        prod *= &p.0 + &p.1;
                    }
                }
                bound += prod;
            }
            total += bound * BigRational::from_integer(BigInt::from(mono.c).abs());
        }
        total
    }
}

/// `(sum_{y < n} y^a q^-by, bound on sum_{y >= n} y^a q^-by)`.
fn one_dim(a: u32, b: u32, q: &BigRational, n: i64) -> (BigRational, BigRational) {
    let qb = q.pow(b as i32);
    let term = |y: i64| BigRational::from_integer(BigInt::from(y).pow(a)) / qb.pow(y as i32);
    let head = (0..n).map(term).fold(BigRational::zero(), |s, t| s + t);
    let nn = BigRational::from_integer(BigInt::from(n));
    let rho = ((&nn + BigRational::one()) / &nn).pow(a as i32) / &qb;
    assert!(rho < BigRational::one(), "tail ratio does not decay");
    (head, term(n) / (BigRational::one() - rho))
}

pub fn fixtures() -> Vec<SumFixture> {
    vec![
        SumFixture { name: "geo", vars: vec!["y"], domain: "y >= 0", inside: |v| v[0] >= 0, monos: vec![m(1, &[0], &[1])] },
        SumFixture { name: "lin", vars: vec!["y"], domain: "y >= 0", inside: |v| v[0] >= 0, monos: vec![m(1, &[1], &[1])] },
        SumFixture { name: "quad2", vars: vec!["y"], domain: "y >= 0", inside: |v| v[0] >= 0, monos: vec![m(1, &[2], &[2])] },
        SumFixture { name: "shift3", vars: vec!["y"], domain: "y >= 3", inside: |v| v[0] >= 3, monos: vec![m(1, &[0], &[1])] },
        SumFixture {
            name: "even",
            vars: vec!["y"],
            domain: "y >= 0 and y mod 2 = 0",
            inside: |v| v[0] >= 0 && v[0] % 2 == 0,
            monos: vec![m(1, &[0], &[1])],
        },
        SumFixture {
            name: "window",
            vars: vec!["y"],
            domain: "2 <= y and y <= 10",
            inside: |v| (2..=10).contains(&v[0]),
            monos: vec![m(1, &[0], &[1])],
        },
        SumFixture {
            name: "cubic",
            vars: vec!["y"],
            domain: "y >= 0",
            inside: |v| v[0] >= 0,
            monos: vec![m(1, &[3], &[1]), m(-1, &[1], &[1])],
        },
        SumFixture {
            name: "mixed",
            vars: vec!["y"],
            domain: "y >= 0",
            inside: |v| v[0] >= 0,
            monos: vec![m(3, &[0], &[1]), m(-2, &[0], &[3])],
        },
        SumFixture {
            name: "res31",
            vars: vec!["y"],
            domain: "y >= 0 and y mod 3 = 1",
            inside: |v| v[0] >= 0 && v[0] % 3 == 1,
            monos: vec![m(1, &[0], &[1])],
        },
        SumFixture {
            name: "odd_tail",
            vars: vec!["y"],
            domain: "y >= 5 and y mod 2 = 1",
            inside: |v| v[0] >= 5 && v[0] % 2 == 1,
            monos: vec![m(1, &[1], &[2])],
        },
        SumFixture { name: "scaled", vars: vec!["y"], domain: "y >= 0", inside: |v| v[0] >= 0, monos: vec![m(7, &[0], &[2])] },
        SumFixture { name: "sq_pos", vars: vec!["y"], domain: "y >= 1", inside: |v| v[0] >= 1, monos: vec![m(1, &[2], &[1])] },
        SumFixture {
            name: "two_rates",
            vars: vec!["y"],
            domain: "y >= 0",
            inside: |v| v[0] >= 0,
            monos: vec![m(1, &[0], &[3]), m(1, &[1], &[1])],
        },
        SumFixture {
            name: "plane",
            vars: vec!["x", "y"],
            domain: "x >= 0 and y >= 0",
            inside: |v| v[0] >= 0 && v[1] >= 0,
            monos: vec![m(1, &[0, 0], &[1, 1])],
        },
        SumFixture {
            name: "plane_lin",
            vars: vec!["x", "y"],
            domain: "x >= 0 and y >= 0",
            inside: |v| v[0] >= 0 && v[1] >= 0,
            monos: vec![m(1, &[1, 0], &[1, 2])],
        },
        SumFixture {
            name: "wedge",
            vars: vec!["x", "y"],
            domain: "0 <= x and x <= y",
            inside: |v| 0 <= v[0] && v[0] <= v[1],
            monos: vec![m(1, &[0, 0], &[1, 1])],
        },
        SumFixture {
            name: "parity",
            vars: vec!["x", "y"],
            domain: "x >= 0 and y >= 0 and x + y mod 2 = 0",
            inside: |v| v[0] >= 0 && v[1] >= 0 && (v[0] + v[1]) % 2 == 0,
            monos: vec![m(1, &[0, 0], &[2, 1])],
        },
        SumFixture {
            name: "bilinear",
            vars: vec!["x", "y"],
            domain: "x >= 0 and y >= 0",
            inside: |v| v[0] >= 0 && v[1] >= 0,
            monos: vec![m(1, &[1, 1], &[1, 1])],
        },
        SumFixture {
            name: "steep",
            vars: vec!["x", "y"],
            domain: "x >= 0 and y >= 2*x",
            inside: |v| v[0] >= 0 && v[1] >= 2 * v[0],
            monos: vec![m(1, &[0, 0], &[1, 1])],
        },
        SumFixture {
            name: "strip",
            vars: vec!["x", "y"],
            domain: "0 <= x and x <= 5 and y >= 0",
            inside: |v| (0..=5).contains(&v[0]) && v[1] >= 0,
            monos: vec![m(1, &[0, 0], &[1, 1])],
        },
        SumFixture {
            name: "band",
            vars: vec!["x", "y"],
            domain: "0 <= x and x <= y and y <= x + 3",
            inside: |v| 0 <= v[0] && v[0] <= v[1] && v[1] <= v[0] + 3,
            monos: vec![m(1, &[0, 0], &[1, 3])],
        },
        SumFixture {
            name: "corner",
            vars: vec!["x", "y"],
            domain: "x >= 1 and y >= 1",
            inside: |v| v[0] >= 1 && v[1] >= 1,
            monos: vec![m(1, &[1, 0], &[2, 2]), m(1, &[0, 1], &[2, 2])],
        },
        SumFixture {
            name: "lattice",
            vars: vec!["x", "y"],
            domain: "x >= 0 and y >= 0 and x mod 3 = 0 and y mod 2 = 1",
            inside: |v| v[0] >= 0 && v[1] >= 0 && v[0] % 3 == 0 && v[1] % 2 == 1,
            monos: vec![m(1, &[0, 0], &[1, 1])],
        },
        SumFixture {
            name: "lower_sq",
            vars: vec!["x", "y"],
            domain: "y >= 0 and x >= y",
            inside: |v| v[1] >= 0 && v[0] >= v[1],
            monos: vec![m(1, &[2, 0], &[1, 1])],
        },
        SumFixture {
            name: "antisym",
            vars: vec!["x", "y"],
            domain: "y >= 0 and x >= y",
            inside: |v| v[1] >= 0 && v[0] >= v[1],
            monos: vec![m(1, &[0, 0], &[1, 2]), m(-1, &[0, 0], &[2, 1])],
        },
    ]
}
