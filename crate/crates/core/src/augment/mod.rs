//! Single-transformation image augmentation.

mod apply;
mod image;
mod ops;
mod policy;

pub use apply::{apply, apply_op};
pub use image::{
    decode_img1, decode_ppm, encode_img1, encode_ppm, read_image, write_img1, write_ppm, Image, IMAGE_MAGIC,
};
pub use ops::{AppliedAug, AugOp};
pub use policy::{attach_augs, augment_selected, draw_aug, sample_stream, trivial_augment, AugmentedImage};
