"""Spanish given names with conventional gender, for rule-based inference.

Keys are accent-folded and lowercased. The list mixes modern and older
forms common in Iberian and Latin American parish records. It is a
fallback for when a model supplies no gender; coverage gaps fall through
to the -a/-o ending heuristic, then to Unknown.
"""

MALE_NAMES = {
    "abel", "adolfo", "adrian", "agustin", "alberto", "alejandro", "alfonso",
    "alfredo", "alonso", "alvaro", "ambrosio", "andres", "angel", "anselmo",
    "antonio", "armando", "arturo", "baltasar", "bartolome", "basilio",
    "benito", "bernardo", "blas", "bruno", "camilo", "carlos", "casimiro",
    "cayetano", "cesar", "cipriano", "cirilo", "claudio", "clemente",
    "cristobal", "damian", "daniel", "david", "diego", "domingo", "edmundo",
    "eduardo", "emilio", "enrique", "ernesto", "esteban", "eugenio",
    "eusebio", "fabian", "faustino", "federico", "felipe", "felix",
    "fermin", "fernando", "fidel", "francisco", "gabriel", "gaspar",
    "german", "gerardo", "gilberto", "gonzalo", "gregorio", "guillermo",
    "gustavo", "hector", "hernan", "hilario", "hipolito", "horacio",
    "hugo", "ignacio", "isidro", "ismael", "jacinto", "jaime", "javier",
    "jeronimo", "jesus", "joaquin", "jorge", "jose", "juan", "julian",
    "julio", "justo", "leandro", "leonardo", "leopoldo", "lorenzo",
    "lucas", "luciano", "luis", "manuel", "marcelino", "marcelo", "marcos",
    "mariano", "martin", "mateo", "matias", "mauricio", "maximo", "miguel",
    "narciso", "nicolas", "octavio", "pablo", "pascual", "patricio",
    "pedro", "rafael", "raimundo", "ramiro", "ramon", "raul", "ricardo",
    "roberto", "rodrigo", "rogelio", "roman", "ruben", "salvador",
    "santiago", "santos", "sebastian", "segundo", "severino", "silvestre",
    "simon", "teodoro", "tomas", "valentin", "vicente", "victor",
    "victoriano", "wenceslao", "xavier", "zacarias",
}

FEMALE_NAMES = {
    "adela", "adriana", "agueda", "agustina", "alicia", "amalia", "amparo",
    "ana", "andrea", "angela", "angeles", "antonia", "asuncion", "aurora",
    "barbara", "beatriz", "belen", "benita", "bernarda", "blanca",
    "brigida", "candelaria", "caridad", "carlota", "carmen", "carolina",
    "catalina", "cecilia", "celia", "clara", "claudia", "concepcion",
    "consuelo", "cristina", "delfina", "dolores", "dominga", "elena",
    "elisa", "elvira", "emilia", "encarnacion", "esperanza", "estela",
    "eugenia", "eulalia", "felipa", "felisa", "filomena", "francisca",
    "gabriela", "gertrudis", "gloria", "gracia", "graciela", "guadalupe",
    "ines", "irene", "isabel", "jacinta", "joaquina", "josefa", "josefina",
    "juana", "juliana", "julia", "laura", "leonor", "lorenza", "lourdes",
    "lucia", "luisa", "luz", "magdalena", "manuela", "margarita", "maria",
    "mariana", "marta", "matilde", "mercedes", "micaela", "milagros",
    "monica", "natalia", "nieves", "norberta", "ofelia", "paloma", "paula",
    "paulina", "petra", "pilar", "purificacion", "ramona", "raquel",
    "regina", "remedios", "rita", "rocio", "rosa", "rosalia", "rosario",
    "rufina", "sara", "serafina", "silvia", "sofia", "soledad", "susana",
    "teodora", "teresa", "tomasa", "trinidad", "ursula", "valentina",
    "veronica", "victoria", "virginia", "visitacion", "ysabel",
}
