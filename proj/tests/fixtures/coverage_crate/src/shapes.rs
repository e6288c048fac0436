pub struct Rect {
    pub w: i32,
    pub h: i32,
}

impl Rect {
    pub fn area(&self) -> i32 {
        self.w * self.h
    }
}
