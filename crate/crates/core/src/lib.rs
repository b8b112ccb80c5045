pub mod annotation;
pub mod bundled;
pub mod corpus;
pub mod decisions;
pub mod frames;
pub mod lexsem;
pub mod morph;
pub mod rules;
pub mod script;
pub mod syntax;
pub mod xml;
