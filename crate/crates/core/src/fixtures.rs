//! Bundled example models.

/// The biofuel production plant: feed train, heat exchangers, heater,
/// reactor, separator pair and duplicated distillation column.
pub const BIOFUEL_PLANT: &str = include_str!("../models/biofuel_plant.rbd");

/// The raw material supply train on its own (four elements in series).
pub const FEED_SUBSYSTEM: &str = include_str!("../models/feed_subsystem.rbd");
