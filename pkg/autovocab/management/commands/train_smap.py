from ...controllers.pipeline_controller import PipelineController, avs
from ...models import SmapParams
from ...repositories.checkpoint_repository import CheckpointRepository
from ...services.training_service import TrainingConfig, TrainingService
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Distil masked attention pooling onto camera-side targets and write a checkpoint'

    def add_arguments(self, parser):
        parser.add_argument('--scene', action='append', required=True, help='Scene directory (repeatable)')
        self.add_space_arguments(parser)
        parser.add_argument('--epochs', type=int, default=None, help='Epochs (settings AVS.EPOCHS)')
        parser.add_argument('--lr', type=float, default=None, help='Base learning rate (settings AVS.LEARNING_RATE)')
        parser.add_argument('--poly-power', type=float, default=None, help='Poly decay power (settings AVS.POLY_POWER)')
        parser.add_argument('--hidden', type=int, default=None, help='PE hidden width (settings AVS.PE_HIDDEN)')
        parser.add_argument('--heads', type=int, default=None, help='Attention heads (settings AVS.HEADS)')
        self.add_bool_argument(parser, '--use-pe', True, 'Train with the positional encoding')
        parser.add_argument('--init', choices=['random', 'identity'], default='random', help='Starting weights')
        parser.add_argument('--out', required=True, help='Checkpoint path')
        self.add_output_argument(parser)

    def handle(self, *args, **options):
        scenes = [PipelineController.load_scene(path) for path in options['scene']]
        space = PipelineController.build_space(scenes[0], **self.space_options(options))
        for scene in scenes[1:]:
            for name in scene.cloud.label_table or []:
                space.anchor(name)
        dataset = PipelineController.training_dataset(scenes, space)

        config = TrainingConfig(
            lr=avs('LEARNING_RATE', options['lr']),
            epochs=avs('EPOCHS', options['epochs']),
            poly_power=avs('POLY_POWER', options['poly_power']),
            seed=space.seed,
            hidden=avs('PE_HIDDEN', options['hidden']),
            heads=avs('HEADS', options['heads']),
            use_pe=options['use_pe'],
        )
        params = None
        if options['init'] == 'identity':
            params = SmapParams.identity(space.dim, config.hidden, config.heads)
        result = TrainingService.train_smap(dataset, config, params)
        CheckpointRepository.write(result.params, options['out'])
        self.emit({
            'checkpoint': options['out'],
            'params': PipelineController.describe_params(result.params),
            'steps': len(result.step_losses),
            'epoch_losses': result.epoch_losses,
            'final_loss': result.final_loss,
            'learning_rate': config.lr,
            'poly_power': config.poly_power,
        }, options['json_out'])
