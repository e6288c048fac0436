pub mod shape;

#[derive(Clone, Copy, Debug)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }

    pub fn dot(&self, o: &Point) -> i32 {
        self.x * o.x + self.y * o.y
    }
}
