/// Plain SGD with heavy-ball momentum and L2 weight decay.
///
/// `v <- momentum * v + grad + weight_decay * w`, then `w <- w - lr * v`.
/// Biases are not decayed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdParams {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl SgdParams {
    pub fn new(lr: f64, momentum: f64, weight_decay: f64) -> Self {
        Self {
            lr,
            momentum,
            weight_decay,
        }
    }
}
