//! Words, tensor polynomials, truncated group elements and the products on them.

mod group;
mod poly;
mod shuffle;
mod text;
mod word;

pub use group::{chen_product, group_inverse, pair, tensor_exp, GroupTensor};
pub use poly::TensorPoly;
pub(crate) use poly::check_dim;
pub use shuffle::{shuffle, shuffle_exp, shuffle_power, shuffle_truncated, shuffle_words};
pub use text::{from_text, to_text};
pub use word::{all_words, words_up_to, Word};
