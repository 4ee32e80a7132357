//! Data-parallel helpers. With the `parallel` feature they dispatch to rayon,
//! otherwise they run the same closures sequentially. Every helper preserves
//! output order, so results do not depend on the thread count.

#[cfg(feature = "parallel")]
mod imp {
    use rayon::prelude::*;

    pub fn fill_indexed<F>(out: &mut [f64], f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        out.par_iter_mut().enumerate().for_each(|(i, y)| *y = f(i));
    }

    pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }

    pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        items.par_iter().map(f).collect()
    }

    pub fn for_each_chunk_mut<F>(data: &mut [f64], chunk: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }

    pub const ENABLED: bool = true;
}

#[cfg(not(feature = "parallel"))]
mod imp {
    pub fn fill_indexed<F>(out: &mut [f64], f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        out.iter_mut().enumerate().for_each(|(i, y)| *y = f(i));
    }

    pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }

    pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        items.iter().map(f).collect()
    }

    pub fn for_each_chunk_mut<F>(data: &mut [f64], chunk: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }

    pub const ENABLED: bool = false;
}

pub use imp::*;

/// Fixed left-to-right dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    const LANES: usize = 8;
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; LANES];
    let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..LANES {
            acc[k] += x[k] * y[k];
        }
    }
    let tail = ra.iter().zip(rb).fold(0.0, |s, (x, y)| s + x * y);
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}
