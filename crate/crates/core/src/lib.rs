pub mod adele;
pub mod adelic;
pub mod circle;
pub mod gallery;
pub mod limit;
pub mod numeric;
