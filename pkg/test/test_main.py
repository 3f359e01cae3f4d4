# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

import os
import shutil
import tempfile

from test.main_tester import MainTester


class TestMain(MainTester):
    """Test output and exit statuses of `polariton.__main__`.

    """
    # This expects to be run from the project root
    EXPECTED_OUTPUT_FILE = os.path.join(os.getcwd(), 'test/expected_output/main.out')


    def setUp(self):
        self.directory = tempfile.mkdtemp(prefix='polariton-test-')

    def tearDown(self):
        shutil.rmtree(self.directory)


    def test_main(self):
        with open(os.path.join(self.directory, 'bad.cfg'), 'w') as config_file:
            config_file.write('grid.N = 60\nfield.B = 9\n')

        # Run inside the temporary directory so no absolute path is printed
        commands = [
            ('{} help'.format(self.program), 0),
            ('{} help thr'.format(self.program), 0),
            ('{} frobnicate'.format(self.program), 2),
            ('{} -s grid.N=8 help'.format(self.program), 2),
            ('{} -c bad.cfg dispersion'.format(self.program), 2),
            ('{} -o out -s dispersion.points=5 dispersion'.format(self.program), 0),
        ]

        self.redirect_output()
        try:
            statuses = [self.run_command(command, cwd=self.directory)
                        for command, _ in commands]
        finally:
            self.reset_output()

        self.assertEqual(statuses, [status for _, status in commands])
        out_dir = os.path.join(self.directory, 'out')
        self.assertEqual(sorted(os.listdir(out_dir)),
                         ['dispersion_B{}.csv'.format(B) for B in range(7)] + ['manifest.json'])
        with open(os.path.join(out_dir, 'dispersion_B0.csv'), 'r') as csv_file:
            self.assertEqual(len(csv_file.read().splitlines()), 6)
        self.compare_output()
