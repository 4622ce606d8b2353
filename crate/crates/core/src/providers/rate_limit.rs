use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Token bucket shared by every caller of one provider configuration.
#[derive(Debug)]
pub struct TokenBucket {
    capacity: f64,
    refill_per_sec: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn new(refill_per_sec: f64, capacity: f64) -> Self {
        assert!(refill_per_sec > 0.0 && capacity >= 1.0);
        Self {
            capacity,
            refill_per_sec,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    /// Takes one token if available, otherwise returns how long to wait.
    pub fn try_acquire(&self) -> Result<(), Duration> {
        let mut guard = self.state.lock().unwrap_or_else(|p| p.into_inner());
        let (tokens, last) = *guard;
        let now = Instant::now();
        let refilled =
            (tokens + now.duration_since(last).as_secs_f64() * self.refill_per_sec).min(self.capacity);
        if refilled >= 1.0 {
            *guard = (refilled - 1.0, now);
            Ok(())
        } else {
            *guard = (refilled, now);
            Err(Duration::from_secs_f64((1.0 - refilled) / self.refill_per_sec))
        }
    }

    /// Blocks until a token is available.
    pub fn acquire(&self) {
        while let Err(wait) = self.try_acquire() {
            std::thread::sleep(wait);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burst_up_to_capacity_then_waits() {
        let bucket = TokenBucket::new(1.0, 2.0);
        assert!(bucket.try_acquire().is_ok());
        assert!(bucket.try_acquire().is_ok());
        let wait = bucket.try_acquire().unwrap_err();
        assert!(wait > Duration::ZERO && wait <= Duration::from_secs(1));
    }
}
