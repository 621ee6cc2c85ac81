//! Random field generators for unit tests.

use num_complex::Complex64;
use rand::Rng;

use crate::spectral::{hodge_project, FieldKind, ModeLattice, SpectralField};

fn weight(lat: &ModeLattice, idx: usize) -> f64 {
    (-0.5 * (lat.n_squared(idx) as f64).sqrt()).exp()
}

pub fn random_scalar<R: Rng>(rng: &mut R, lat: ModeLattice, amp: f64) -> SpectralField {
    let mut f = SpectralField::zeros(lat, FieldKind::Scalar);
    for idx in 0..lat.len() {
        let neg = lat.negate(idx);
        if neg < idx {
            continue;
        }
        let w = amp * weight(&lat, idx);
        let mut a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w;
        if neg == idx {
            a.im = 0.0;
        }
        f.amplitude_mut(idx)[0] = a;
        f.amplitude_mut(neg)[0] = a.conj();
    }
    f
}

pub fn random_solenoidal<R: Rng>(rng: &mut R, lat: ModeLattice, amp: f64) -> SpectralField {
    let dim = lat.dim();
    let mut f = SpectralField::zeros(lat, FieldKind::Vector);
    for idx in 0..lat.len() {
        let neg = lat.negate(idx);
        if neg <= idx {
            continue;
        }
        let w = amp * weight(&lat, idx);
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w)
            .collect();
        let k = lat.wavevector(idx);
        let p = hodge_project(&k[..dim], &v).expect("nonzero mode");
        f.amplitude_mut(idx).copy_from_slice(&p);
        let conj: Vec<Complex64> = p.iter().map(|x| x.conj()).collect();
        f.amplitude_mut(neg).copy_from_slice(&conj);
    }
    f
}
