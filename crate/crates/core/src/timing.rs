//! Wall-clock and process CPU time.

use std::time::Instant;

/// CPU time consumed by the whole process, summed across threads.
pub fn process_cpu_seconds() -> f64 {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: `ts` is a valid, writable timespec for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return 0.0;
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// Measures elapsed wall and CPU seconds from its creation.
#[derive(Clone, Copy, Debug)]
pub struct Stopwatch {
    wall: Instant,
    cpu: f64,
}

impl Stopwatch {
    pub fn start() -> Self {
        Self {
            wall: Instant::now(),
            cpu: process_cpu_seconds(),
        }
    }

    pub fn wall_seconds(&self) -> f64 {
        self.wall.elapsed().as_secs_f64()
    }

    pub fn cpu_seconds(&self) -> f64 {
        (process_cpu_seconds() - self.cpu).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cpu_time_advances_under_load() {
        let sw = Stopwatch::start();
        let mut acc = 0.0f64;
        for i in 0..5_000_000 {
            acc += (i as f64).sqrt();
        }
        assert!(acc > 0.0);
        assert!(sw.cpu_seconds() > 0.0);
        assert!(sw.wall_seconds() > 0.0);
    }
}
