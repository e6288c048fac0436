use super::Point;
use crate::Area;

pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl crate::Area for Rect {
    fn area(&self) -> f64 {
        ((self.max.x - self.min.x) * (self.max.y - self.min.y)) as f64
    }
}
