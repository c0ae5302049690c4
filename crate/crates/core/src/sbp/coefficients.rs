//! Diagonal-norm closure coefficients for the classical SBP first-derivative
//! operators of interior order 2, 4, 6 and 8 (unit grid spacing).
//!
//! Each table gives the norm weights of the boundary block, the interior
//! central-difference coefficients `a_1..a_p` (the stencil is
//! `sum_k a_k (u[i+k] - u[i-k])`) and the dense closure rows for the left
//! boundary. The right boundary uses the same rows rotated by 180 degrees and
//! negated.
//!
//! Order 6 uses the free parameter `q_{4,5} = 342523/518400`. The order 8
//! family has three free parameters; they are fixed as the minimiser of the
//! norm-weighted boundary truncation error for the monomials `x^5` and `x^6`.
#![allow(clippy::excessive_precision)]
#![allow(clippy::unreadable_literal)]

pub(crate) struct Coefficients {
    pub weights: &'static [f64],
    pub stencil: &'static [f64],
    pub closure: &'static [&'static [f64]],
}

const H2: [f64; 1] = [1.0 / 2.0];
const STENCIL2: [f64; 1] = [1.0 / 2.0];
const CLOSURE2: [[f64; 2]; 1] = [[-1.0, 1.0]];

const H4: [f64; 4] = [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0];
const STENCIL4: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];
const CLOSURE4: [[f64; 6]; 4] = [
    [
        -24.0 / 17.0,
        59.0 / 34.0,
        -4.0 / 17.0,
        -3.0 / 34.0,
        0.0,
        0.0,
    ],
    [-1.0 / 2.0, 0.0, 1.0 / 2.0, 0.0, 0.0, 0.0],
    [4.0 / 43.0, -59.0 / 86.0, 0.0, 59.0 / 86.0, -4.0 / 43.0, 0.0],
    [3.0 / 98.0, 0.0, -59.0 / 98.0, 0.0, 32.0 / 49.0, -4.0 / 49.0],
];

const H6: [f64; 6] = [
    13649.0 / 43200.0,
    12013.0 / 8640.0,
    2711.0 / 4320.0,
    5359.0 / 4320.0,
    7877.0 / 8640.0,
    43801.0 / 43200.0,
];
const STENCIL6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const CLOSURE6: [[f64; 9]; 6] = [
    [
        -21600.0 / 13649.0,
        104009.0 / 54596.0,
        30443.0 / 81894.0,
        -33311.0 / 27298.0,
        16863.0 / 27298.0,
        -15025.0 / 163788.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -104009.0 / 240260.0,
        0.0,
        -311.0 / 72078.0,
        20229.0 / 24026.0,
        -24337.0 / 48052.0,
        36661.0 / 360390.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -30443.0 / 162660.0,
        311.0 / 32532.0,
        0.0,
        -11155.0 / 16266.0,
        41287.0 / 32532.0,
        -21999.0 / 54220.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        33311.0 / 107180.0,
        -20229.0 / 21436.0,
        485.0 / 1398.0,
        0.0,
        4147.0 / 21436.0,
        25427.0 / 321540.0,
        72.0 / 5359.0,
        0.0,
        0.0,
    ],
    [
        -16863.0 / 78770.0,
        24337.0 / 31508.0,
        -41287.0 / 47262.0,
        -4147.0 / 15754.0,
        0.0,
        342523.0 / 472620.0,
        -1296.0 / 7877.0,
        144.0 / 7877.0,
        0.0,
    ],
    [
        15025.0 / 525612.0,
        -36661.0 / 262806.0,
        21999.0 / 87602.0,
        -25427.0 / 262806.0,
        -342523.0 / 525612.0,
        0.0,
        32400.0 / 43801.0,
        -6480.0 / 43801.0,
        720.0 / 43801.0,
    ],
];

const H8: [f64; 8] = [
    1498139.0 / 5080320.0,
    1107307.0 / 725760.0,
    20761.0 / 80640.0,
    1304999.0 / 725760.0,
    299527.0 / 725760.0,
    103097.0 / 80640.0,
    670091.0 / 725760.0,
    5127739.0 / 5080320.0,
];
const STENCIL8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const CLOSURE8: [[f64; 12]; 8] = [
    [
        -1.69554360443189855e+00,
        2.26289062711530597e+00,
        -9.72689796407429919e-02,
        -6.96321686742759294e-01,
        1.08568228554633099e-02,
        2.81105734637875804e-01,
        -3.16888243359352492e-02,
        -3.40300894573089610e-02,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -4.37370601599310904e-01,
        0.0,
        1.26048735166159470e-01,
        4.27727380145085045e-01,
        3.24085040061413473e-03,
        -1.51791550148417997e-01,
        1.43015638790325132e-02,
        1.78436221568377580e-02,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.11413457535995894e-01,
        -7.46991671299469417e-01,
        0.0,
        8.88737389065517913e-01,
        -3.47920477365873504e-01,
        7.65295589406400495e-02,
        3.78085829991137989e-02,
        -1.95768398759247723e-02,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.14196767907223426e-01,
        -3.62931712688142838e-01,
        -1.27248903952802223e-01,
        0.0,
        2.00903083204725219e-01,
        2.15623354184296817e-01,
        -1.94985374404652960e-02,
        -2.10440512148351404e-02,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -7.75748322038268250e-03,
        -1.19809444041867191e-02,
        2.17037506720048928e-01,
        -8.75307810912148820e-01,
        0.0,
        9.32746755875142108e-01,
        -3.31915396646035366e-01,
        8.58310164994637304e-02,
        -8.65364391190109709e-03,
        0.0,
        0.0,
        0.0,
    ],
    [
        -6.48388401960570959e-02,
        1.81145314089529802e-01,
        -1.54110223689014024e-02,
        -3.03261611866228631e-01,
        -3.01100298798449462e-01,
        0.0,
        5.84612662342409828e-01,
        -1.08149898751155105e-01,
        2.97971812952850246e-02,
        -2.79348574643297105e-03,
        0.0,
        0.0,
    ],
    [
        1.01210696120406871e-02,
        -2.36329420842838582e-02,
        -1.05425918640922132e-02,
        3.79733078958973749e-02,
        1.48364360976639048e-01,
        -8.09511401952330178e-01,
        0.0,
        8.26451616324904159e-01,
        -2.16615355227872036e-01,
        4.12600676624518131e-02,
        -3.86813134335485791e-03,
        0.0,
    ],
    [
        9.94235552735492009e-03,
        -2.69726236139067981e-02,
        4.99350506682120100e-03,
        3.74896734290026262e-02,
        -3.50955749021633345e-02,
        1.36989343066703240e-01,
        -7.56002700262903282e-01,
        0.0,
        7.92601963555477407e-01,
        -1.98150490888869352e-01,
        3.77429506454989225e-02,
        -3.53840162301552420e-03,
    ],
];

pub(crate) fn for_order(order: usize) -> Option<Coefficients> {
    let c = match order {
        2 => Coefficients {
            weights: &H2,
            stencil: &STENCIL2,
            closure: &[&CLOSURE2[0]],
        },
        4 => Coefficients {
            weights: &H4,
            stencil: &STENCIL4,
            closure: &[&CLOSURE4[0], &CLOSURE4[1], &CLOSURE4[2], &CLOSURE4[3]],
        },
        6 => Coefficients {
            weights: &H6,
            stencil: &STENCIL6,
            closure: &[
                &CLOSURE6[0],
                &CLOSURE6[1],
                &CLOSURE6[2],
                &CLOSURE6[3],
                &CLOSURE6[4],
                &CLOSURE6[5],
            ],
        },
        8 => Coefficients {
            weights: &H8,
            stencil: &STENCIL8,
            closure: &[
                &CLOSURE8[0],
                &CLOSURE8[1],
                &CLOSURE8[2],
                &CLOSURE8[3],
                &CLOSURE8[4],
                &CLOSURE8[5],
                &CLOSURE8[6],
                &CLOSURE8[7],
            ],
        },
        _ => return None,
    };
    Some(c)
}
