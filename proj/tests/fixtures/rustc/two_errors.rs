pub fn mismatched() -> i32 {
    let x: i32 = "one";
    x
}

pub fn no_add(a: i32, b: &str) -> i32 {
    a + b
}
