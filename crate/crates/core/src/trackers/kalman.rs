use nalgebra::{SMatrix, SVector};

use crate::matching::BoundingBox;

type State = SVector<f64, 7>;
type Cov = SMatrix<f64, 7, 7>;
type Obs = SVector<f64, 4>;

/// Constant-velocity box filter over `(cx, cy, s, r, vx, vy, vs)` where `s`
/// is the area and `r` the aspect ratio, which has no velocity term.
#[derive(Debug, Clone)]
pub struct BoxKalman {
    x: State,
    p: Cov,
}

fn transition() -> Cov {
    let mut f = Cov::identity();
    f[(0, 4)] = 1.0;
    f[(1, 5)] = 1.0;
    f[(2, 6)] = 1.0;
    f
}

fn observation() -> SMatrix<f64, 4, 7> {
    SMatrix::<f64, 4, 7>::identity()
}

fn to_obs(b: &BoundingBox) -> Obs {
    let (w, h) = (b.width(), b.height());
    Obs::new(b.x1 + w / 2.0, b.y1 + h / 2.0, w * h, w / h)
}

impl BoxKalman {
    pub fn new(bbox: &BoundingBox) -> Self {
        let z = to_obs(bbox);
        let x = State::from_column_slice(&[z[0], z[1], z[2], z[3], 0.0, 0.0, 0.0]);
        let p = Cov::from_diagonal(&State::from_column_slice(&[10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4]));
        Self { x, p }
    }

    /// Advances the state by one frame.
    pub fn predict(&mut self) {
        if self.x[2] + self.x[6] <= 0.0 {
            self.x[6] = 0.0;
        }
        let f = transition();
        let q = Cov::from_diagonal(&State::from_column_slice(&[1.0, 1.0, 1.0, 1.0, 0.01, 0.01, 1e-4]));
        self.x = f * self.x;
        self.p = f * self.p * f.transpose() + q;
    }

    pub fn update(&mut self, bbox: &BoundingBox) {
        let h = observation();
        let r = SMatrix::<f64, 4, 4>::from_diagonal(&Obs::new(1.0, 1.0, 10.0, 10.0));
        let y = to_obs(bbox) - h * self.x;
        let s = h * self.p * h.transpose() + r;
        let Some(s_inv) = s.try_inverse() else {
            return;
        };
        let k = self.p * h.transpose() * s_inv;
        self.x += k * y;
        self.p = (Cov::identity() - k * h) * self.p;
    }

    /// Current box estimate; degenerate states give an empty box.
    pub fn bbox(&self) -> BoundingBox {
        let (cx, cy, s, r) = (self.x[0], self.x[1], self.x[2], self.x[3]);
        if !(s > 0.0 && r > 0.0) {
            return BoundingBox { x1: cx, y1: cy, x2: cx, y2: cy };
        }
        let w = (s * r).sqrt();
        let h = s / w;
        BoundingBox {
            x1: cx - w / 2.0,
            y1: cy - h / 2.0,
            x2: cx + w / 2.0,
            y2: cy + h / 2.0,
        }
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.x[4], self.x[5])
    }
}
