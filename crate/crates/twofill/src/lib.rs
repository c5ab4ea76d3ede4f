//! Exact combinatorics of 2-filling rays: weighted train tracks, foliated
//! rectangle complexes, a pseudo-Anosov flat surface, carrying maps and the
//! word calculus of loops and rays.

pub mod carrying;
pub mod flatdyn;
pub mod numerics;
pub mod par;
pub mod raycalc;
pub mod rectcomplex;
pub mod traintrack;
pub mod verify;
