//! Calibration pairs of the ten-shot prompt, transcribed independently of
//! the fixture file.

pub const CALIBRATION_INPUTS: [&str; 10] = [
    "MILK, LOW FAT (1%) (76.25); BEEF, NS AS TO CUT, COOKED, NS AS TO FAT EATEN (12.56); BEEF, NS AS TO CUT, COOKED, LEAN ONLY EATEN (134); BEEF, NS AS TO CUT, COOKED, LEAN ONLY EATEN (134); TORTILLA, CORN (168); CEREAL, READY-TO-EAT, NFS (52.5); APPLE JUICE, 100% (325.5); POTATO, NFS (120); BROCCOLI, COOKED, FROM FRESH, FAT NOT ADDED IN COOKING (117); BROCCOLI, COOKED, FROM FRESH, FAT NOT ADDED IN COOKING (117); CARROTS, COOKED, FROM FRESH, FAT NOT ADDED IN COOKING (117); SOFT DRINK, FRUIT FLAVORED, CAFFEINE FREE (248)",
    "ICE CREAM, REGULAR, NOT CHOCOLATE (141.31); CHEESE, NFS (24); BOLOGNA, NFS (28); SUNFLOWER SEEDS, HULLED, ROASTED, SALTED (46); BREAD, WHITE (52); COOKIE, MARSHMALLOW, W/ RICE CEREAL (NO-BAKE) (60); MILK 'N CEREAL BAR (24); PASTA W/ TOMATO SAUCE & MEAT/MEATBALLS, CANNED (280.13); SOFT DRINK, FRUIT-FLAVORED, CAFFEINE FREE (368)",
    "CHICKEN NUGGETS, FROM FROZEN (96); CHICKEN TENDERS OR STRIPS, BREADED, FROM SCHOOL LUNCH (80); BIG MAC (MCDONALDS) (135); MACARONI OR NOODLES WITH CHEESE, MADE FROM PACKAGED MIX (57.5); APPLE, RAW (125); STRAWBERRIES, RAW (108); POTATO, FRENCH FRIES, FAST FOOD (55); POTATO, MASHED, FROM SCHOOL LUNCH (62.5); WATER, BOTTLED, PLAIN (20); WATER, BOTTLED, PLAIN (345)",
    "MILK, COW'S, FLUID, 2% FAT (259.25); CHICKEN, THIGH, STEWED, W/ SKIN (88); BREAD, GARLIC (333); RICE, WHITE, COOKED, REGULAR, NO FAT ADD IN COOKING (79); FROSTED FLAKES, KELLOGG'S (74.31); PIZZA, CHEESE, THIN CRUST (136.78); PLUM, RAW (66); GRAPE JUICE (332.06); FRUIT JUICE DRINK (449.5); FRUIT JUICE DRINK (449.5)",
    "ICE CREAM CONE, VANILLA, PREPACKAGED (95); CHICKEN, NS AS TO PART AND COOKING METHOD, SKIN NOT EATEN (75.94); RICE, WHITE, COOKED, NO ADDED FAT (138.25); TACO, MEAT, NO CHEESE (180); CARROTS, RAW (45); TOMATOES, RAW (67.5); LETTUCE, RAW (19.69); SOFT DRINK, COLA (264.5); SOFT DRINK, COLA (264.5); WATER, BOTTLED, PLAIN (1740)",
    "GENERAL TSO CHICKEN (866.88); WAFFLE, FRUIT (78); RICE, FRIED, W/ PORK (210.38); SYRUP, DIETETIC (5); GRAPE JUICE DRINK (250)",
    "MILK, COW'S, FLUID, 1% FAT (533.75); MILK, SOY, READY-TO-DRINK, NOT BABY (535.94); CHEESE, NATURAL, CHEDDAR OR AMERICAN TYPE (56.7); HAM, SLICED, PREPACKAGED OR DELI, LUNCHEON MEAT (56); CHEESEBURGER, W/ MAYO & TOMATO/CATSUP, ON BUN CHEESEBURGER, (314); EGGS, WHOLE, FRIED (INCL SCRAMBLED, NO MILK ADDED) (46); PEANUT BUTTER (32); PEANUT BUTTER (32); BREAD, RYE (50); BREAD, RYE (25); COOKIE, OATMEAL, W/ RAISINS OR DATES (39); OATMEAL, CKD, INST, MADE W/ MILK, FAT NOT ADDED IN COOKING (307.13); RICE, WHITE, COOKED, REGULAR, NO FAT ADD IN COOKING (207.38); RICE W/ BEANS AND BEEF (433.19); WHITE POTATO, BOILED, W/O PEEL, NS AS TO FAT (516); TOMATOES, RAW (40); LETTUCE, RAW (24); SNICKERS CANDY BAR (17); WATER, TAP (9480)",
    "ICE CREAM, REGULAR, NOT CHOCOLATE (141.31); FISH STICK/FILLET, NS TYPE, FLOURED/BREADED, FRIED (51); WHITE POTATO, FRENCH FRIES, FROM FROZEN, DEEP-FRIED (60.56); TOMATO CATSUP (15); TOMATO CATSUP (15); FRUIT JUICE DRINK, W/ VIT B1 & VIT C (546.88); WATER, BOTTLED, UNSWEETENED (518.44); WATER, BOTTLED, UNSWEETENED (518.44)",
    "MILK, LOW FAT (1%) (106.75); PORK, CRACKLINGS, COOKED (51.19); PINTO/CALICO/RED MEX BEANS, DRY, CKD, FAT ADD, NS TYPE FAT (100.13); TORTILLA, FLOUR (WHEAT) (225); FRUITY PEBBLES CEREAL (52.5); APPLE, RAW (182); WHITE POTATO, CHIPS, RESTRUCTURED, BAKED (21); SOFT DRINK, FRUIT-FLAVORED, W/ CAFFEINE (241.5); WATER, BOTTLED, UNSWEETENED (2610)",
    "PUDDING, TAPIOCA, MADE FROM DRY MIX, MADE WITH MILK (299.06); OYSTERS, COOKED, NS AS TO COOKING METHOD (81.81); BEEF WITH VEGETABLES EXCLUDING CARROTS, BROCCOLI, AND DARK-G (132.28); PORK AND VEGETABLES EXCLUDING CARROTS, BROCCOLI, AND DARK-G (132.28); RICE, WHITE, COOKED, NS AS TO FAT ADDED IN COOKING (213.94); BEEF NOODLE SOUP, CANNED OR READY-TO-SERVE (808.25); TEA, ICED, INSTANT, BLACK, DECAFFEINATED, PRE-SWEETENED WITH (333.5); SOFT DRINK, COLA, DECAFFEINATED (372); SOFT DRINK, FRUIT FLAVORED, CAFFEINE FREE (372); WATER, BOTTLED, UNSWEETENED (720)",
];

pub const CALIBRATION_OUTPUTS: [&str; 10] = [
    "1630; 107.97; 233.28; 79.83; 27.7; 33.68",
    "1629; 43.29; 205.67; 113.29; 14.9; 74.29",
    "1293; 48.28; 135.41; 29.22; 13.2; 62.15",
    "2923; 81.63; 443.26; 206.48; 14.8; 93.63",
    "1338; 57.38; 162.67; 81.11; 8; 51.38",
    "2473; 129.47; 215.26; 71.96; 9.1; 121.12",
    "4270; 201.78; 503.17; 127.52; 38.9; 164.7",
    "854; 18.29; 126.89; 73.54; 4.5; 31.65",
    "1693; 51.67; 257.79; 83.32; 22; 51.17",
    "1742; 58.25; 278.91; 167.56; 7.9; 45.46",
];

pub const CALIBRATION_VALUES: [[f64; 6]; 10] = [
    [1630.0, 107.97, 233.28, 79.83, 27.7, 33.68],
    [1629.0, 43.29, 205.67, 113.29, 14.9, 74.29],
    [1293.0, 48.28, 135.41, 29.22, 13.2, 62.15],
    [2923.0, 81.63, 443.26, 206.48, 14.8, 93.63],
    [1338.0, 57.38, 162.67, 81.11, 8.0, 51.38],
    [2473.0, 129.47, 215.26, 71.96, 9.1, 121.12],
    [4270.0, 201.78, 503.17, 127.52, 38.9, 164.7],
    [854.0, 18.29, 126.89, 73.54, 4.5, 31.65],
    [1693.0, 51.67, 257.79, 83.32, 22.0, 51.17],
    [1742.0, 58.25, 278.91, 167.56, 7.9, 45.46],
];
