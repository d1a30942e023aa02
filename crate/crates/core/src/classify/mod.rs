pub mod catalog;
pub mod rank3;
pub mod candidates;
pub mod data;
pub mod roots;
pub mod census;
